#include "qlimits/array_detection.hpp"

#include <algorithm>
#include <cmath>

#include "qlimits/bounds.hpp"
#include "qlimits/error.hpp"

namespace qlimits {

namespace {

void require_same_grid(const GainDistribution& gain, const TransverseGrid& grid) {
  if (!(gain.grid() == grid)) throw_invalid("incompatible grids");
}

// Cell mask of the illuminated support used for clamping and balancing.
std::vector<bool> support(const Field& mode) {
  double max_i = 0.0;
  for (const auto& v : mode.values()) max_i = std::max(max_i, std::norm(v));
  std::vector<bool> mask(mode.size());
  for (std::size_t k = 0; k < mask.size(); ++k) {
    mask[k] = std::norm(mode[k]) >= kGainClampFraction * max_i && std::norm(mode[k]) > 0.0;
  }
  return mask;
}

std::vector<double> raw_optimal_gain(const ModeExpansion& e, const std::vector<bool>& mask) {
  const double inv_a = std::sqrt(norm_sq(e.modulus_derivative));
  std::vector<double> g(e.mode.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!mask[k]) continue;
    const double u_I = e.modulus_derivative[k].real() / inv_a;
    g[k] = u_I / std::abs(e.mode[k]);
  }
  return g;
}

}  // namespace

GainDistribution::GainDistribution(TransverseGrid grid, std::vector<double> gains, double beta)
    : grid_(grid), gains_(std::move(gains)), beta_(beta) {
  if (gains_.size() != grid_.size()) throw_invalid("gain size does not match grid");
  bool any = false;
  for (double g : gains_) {
    if (!std::isfinite(g)) throw_invalid("non-finite gain");
    any = any || g != 0.0;
  }
  if (!any) throw_invalid("gain distribution is identically zero");
  if (!std::isfinite(beta_)) throw_invalid("non-finite beta");
}

GainDistribution GainDistribution::scaled(double factor) const {
  std::vector<double> g(gains_);
  for (auto& v : g) v *= factor;
  return GainDistribution(grid_, std::move(g), beta_ * factor);
}

double mean_signal(const GainDistribution& gain, const ImageModel& model, double N, double p) {
  const Field mode = mode_at(model, gain.grid(), p);
  double acc = 0.0;
  for (std::size_t k = 0; k < mode.size(); ++k) acc += gain[k] * std::norm(mode[k]);
  return N * acc * gain.grid().cell_measure();
}

double signal_slope(const GainDistribution& gain, const ImageModel& model, double N) {
  const auto e = expand_mode(model, gain.grid());
  double acc = 0.0;
  for (std::size_t k = 0; k < e.mode.size(); ++k) {
    acc += gain[k] * std::abs(e.mode[k]) * e.modulus_derivative[k].real();
  }
  return 2.0 * N * acc * gain.grid().cell_measure();
}

double noise_variance(const GainDistribution& gain, const ImageModel& model, double N,
                      double sigma_P, bool squeezed_noise_mode) {
  if (squeezed_noise_mode) {
    const auto scale = optimal_gain_scale(gain, model);
    if (!scale) {
      throw_invalid("squeezed variance defined only for noise-mode-matched gain");
    }
    return N * sigma_P * sigma_P * (*scale) * (*scale);
  }
  const Field mode = mode_at(model, gain.grid(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < mode.size(); ++k) acc += gain[k] * gain[k] * std::norm(mode[k]);
  return N * acc * gain.grid().cell_measure();
}

GainDistribution optimal_gain(const ImageModel& model, const TransverseGrid& grid, double beta) {
  const auto e = expand_mode(model, grid);
  if (norm_sq(e.modulus_derivative) < 1e-12) throw_numeric("no intensity scheme exists");
  const auto mask = support(e.mode);
  auto g = raw_optimal_gain(e, mask);
  for (auto& v : g) v *= beta;
  return balance(GainDistribution(grid, std::move(g), beta), model);
}

GainDistribution balance(const GainDistribution& gain, const ImageModel& model) {
  const Field mode = mode_at(model, gain.grid(), 0.0);
  const auto mask = support(mode);
  double weighted = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < mode.size(); ++k) {
    weighted += gain[k] * std::norm(mode[k]);
    if (mask[k]) mass += std::norm(mode[k]);
  }
  const double offset = weighted / mass;
  std::vector<double> g(gain.gains().begin(), gain.gains().end());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (mask[k]) g[k] -= offset;
  }
  return GainDistribution(gain.grid(), std::move(g), gain.beta());
}

bool is_balanced(const GainDistribution& gain, const ImageModel& model) {
  // S(0) / N does not depend on N.
  return std::abs(mean_signal(gain, model, 1.0, 0.0)) <= 1e-9;
}

std::optional<double> optimal_gain_scale(const GainDistribution& gain,
                                         const ImageModel& model, double tolerance) {
  const auto e = expand_mode(model, gain.grid());
  if (norm_sq(e.modulus_derivative) < 1e-12) return std::nullopt;
  const auto mask = support(e.mode);
  const auto reference = raw_optimal_gain(e, mask);

  // Least squares fit of gain ~ c * reference, weighted by intensity.
  double gr = 0.0, rr = 0.0, gg = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (!mask[k]) continue;
    const double w = std::norm(e.mode[k]);
    gr += w * gain[k] * reference[k];
    rr += w * reference[k] * reference[k];
    gg += w * gain[k] * gain[k];
  }
  if (!(rr > 0.0) || !(gg > 0.0)) return std::nullopt;
  const double c = gr / rr;
  double residual = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (!mask[k]) continue;
    const double d = gain[k] - c * reference[k];
    residual += std::norm(e.mode[k]) * d * d;
  }
  if (std::sqrt(residual / gg) > tolerance) return std::nullopt;
  return c;
}

DetectionReport scheme_report(const GainDistribution& gain, const ImageModel& model,
                              double N, double sigma_P, double p, bool squeezed_noise_mode) {
  if (!(N > 0.0)) throw_invalid("N must be positive");
  const double signal = mean_signal(gain, model, N, p);
  const double variance = noise_variance(gain, model, N, sigma_P, squeezed_noise_mode);
  const double slope = signal_slope(gain, model, N);
  const double snr = variance > 0.0 ? signal * signal / variance : kInfinity;
  const double p_min = slope != 0.0 ? std::sqrt(variance) / std::abs(slope) : kInfinity;
  return DetectionReport{signal, variance, snr, slope, p_min};
}

}  // namespace qlimits
