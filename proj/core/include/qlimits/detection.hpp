#pragma once

namespace qlimits {

/// Mean signal, noise and sensitivity of one detection scheme at one p.
struct DetectionReport {
  double mean_signal;     // photon-count units, exact in p
  double noise_variance;  // photon-count^2 units
  double snr;             // mean_signal^2 / noise_variance
  double slope;           // d(mean_signal)/dp at p = 0
  double p_min;           // p at which the first-order SNR equals 1

  /// (slope * p)^2 / noise_variance.
  double first_order_snr(double p) const noexcept {
    const double s = slope * p;
    return s * s / noise_variance;
  }
};

}  // namespace qlimits
