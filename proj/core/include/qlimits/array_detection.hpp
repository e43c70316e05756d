#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qlimits/detection.hpp"
#include "qlimits/models.hpp"

namespace qlimits {

/// Per-pixel electronic gain of an array detector. The processed signal
/// is S = sum_k g_k n_k.
class GainDistribution {
 public:
  /// Throws unless gains match the grid, are finite and not all zero.
  GainDistribution(TransverseGrid grid, std::vector<double> gains, double beta = 1.0);

  const TransverseGrid& grid() const noexcept { return grid_; }
  std::span<const double> gains() const noexcept { return gains_; }
  double operator[](std::size_t k) const noexcept { return gains_[k]; }
  std::size_t size() const noexcept { return gains_.size(); }
  double beta() const noexcept { return beta_; }

  GainDistribution scaled(double factor) const;

 private:
  TransverseGrid grid_;
  std::vector<double> gains_;
  double beta_;
};

/// Cells whose intensity |u0|^2 dA falls below this fraction of the
/// brightest cell get zero optimal gain.
inline constexpr double kGainClampFraction = 1e-20;

/// S(p) = N sum_k g_k |u0(r_k, p)|^2 dA, exact in p.
double mean_signal(const GainDistribution& gain, const ImageModel& model, double N, double p);

/// dS/dp at p = 0.
double signal_slope(const GainDistribution& gain, const ImageModel& model, double N);

/// Coherent illumination: N sum_k g_k^2 |u0|^2 dA.
/// Squeezed noise mode: N sigma_P^2 beta^2, defined only when `gain` is
/// proportional to the optimal gain (beta is the fitted proportionality).
double noise_variance(const GainDistribution& gain, const ImageModel& model, double N,
                      double sigma_P, bool squeezed_noise_mode);

/// g = beta u_I / |u0(., 0)|, clamped to zero on the dark tails and
/// re-centered so that S(0) = 0 on the grid.
GainDistribution optimal_gain(const ImageModel& model, const TransverseGrid& grid,
                              double beta = 1.0);

/// Subtracts the intensity-weighted mean gain on the illuminated support.
GainDistribution balance(const GainDistribution& gain, const ImageModel& model);

/// |S(0)| <= 1e-9 N.
bool is_balanced(const GainDistribution& gain, const ImageModel& model);

/// Scale c with gain ~= c * optimal_gain(beta = 1), or nullopt when the
/// relative L2 residual on the support exceeds `tolerance`.
std::optional<double> optimal_gain_scale(const GainDistribution& gain,
                                         const ImageModel& model,
                                         double tolerance = 1e-6);

DetectionReport scheme_report(const GainDistribution& gain, const ImageModel& model,
                              double N, double sigma_P, double p, bool squeezed_noise_mode);

}  // namespace qlimits
