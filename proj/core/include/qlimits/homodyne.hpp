#pragma once

#include <optional>

#include "qlimits/detection.hpp"
#include "qlimits/models.hpp"

namespace qlimits {

/// Balanced homodyne detection with local oscillator
/// E_LO = 2 sqrt(N_LO) lo_mode e^{i theta_LO}.
class HomodyneConfig {
 public:
  /// Throws unless lo_mode is normalized to 1e-9, N > 0 and N_LO >= 100 N.
  HomodyneConfig(Field lo_mode, double N_LO, double theta_LO, double N);

  const Field& lo_mode() const noexcept { return lo_mode_; }
  const TransverseGrid& grid() const noexcept { return lo_mode_.grid(); }
  double N_LO() const noexcept { return N_LO_; }
  double theta_LO() const noexcept { return theta_LO_; }
  double N() const noexcept { return N_; }

  HomodyneConfig with_phase(double theta_LO) const;

 private:
  Field lo_mode_;
  double N_LO_;
  double theta_LO_;
  double N_;
};

/// Default LO power relative to the image: N_LO = 1e4 N.
inline constexpr double kDefaultLoRatio = 1e4;

/// The LO spatial profile for a signal mode: u_E with the global phase
/// psi = arg(sum u_E^2) / 2, psi in (-pi/2, pi/2], removed so the profile is
/// as real as possible. The removed phase is carried by theta_LO instead.
Field lo_profile(const Field& signal_mode);

/// LO shaped on the signal mode with its phase tuned to the maximum of
/// the p-dependent signal.
HomodyneConfig matched_homodyne(const ImageModel& model, const TransverseGrid& grid,
                                double N, std::optional<double> N_LO = std::nullopt);

/// n_-(p) = 2 sqrt(N N_LO) Re[e^{-i theta} <lo, u0(p)>], exact in p.
double mean_difference_signal(const HomodyneConfig& config, const ImageModel& model,
                              double p);

/// d n_- / dp at p = 0.
double homodyne_slope(const HomodyneConfig& config, const ImageModel& model);

/// arg <lo, du0/dp>: the LO phase that maximizes the (positive) slope.
double tune_phase(const HomodyneConfig& config, const ImageModel& model);

/// Brute-force maximization of the slope over `samples` evenly spaced phases.
double scan_phase(const HomodyneConfig& config, const ImageModel& model,
                  int samples = 360);

/// Noise is the LO shot noise N_LO (coherent) or N_LO sigma_P^2 when the
/// u_E component of the image is a squeezed vacuum. The squeezed case
/// requires the LO to match the signal mode up to a global phase.
DetectionReport homodyne_report(const HomodyneConfig& config, const ImageModel& model,
                                double sigma_P, double p, bool squeezed_signal_mode);

}  // namespace qlimits
