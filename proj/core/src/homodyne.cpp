#include "qlimits/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlimits/bounds.hpp"
#include "qlimits/error.hpp"

namespace qlimits {

namespace {

constexpr double kPi = std::numbers::pi;

complex lo_weight(const HomodyneConfig& config) {
  return std::polar(1.0, -config.theta_LO());
}

double amplitude_scale(const HomodyneConfig& config) {
  return 2.0 * std::sqrt(config.N() * config.N_LO());
}

}  // namespace

HomodyneConfig::HomodyneConfig(Field lo_mode, double N_LO, double theta_LO, double N)
    : lo_mode_(std::move(lo_mode)), N_LO_(N_LO), theta_LO_(theta_LO), N_(N) {
  if (!(N_ > 0.0)) throw_invalid("N must be positive");
  if (!(N_LO_ >= 100.0 * N_)) throw_invalid("local oscillator must satisfy N_LO >= 100 N");
  if (!std::isfinite(theta_LO_)) throw_invalid("non-finite LO phase");
  if (std::abs(norm_sq(lo_mode_) - 1.0) > 1e-9) throw_invalid("LO mode is not normalized");
}

HomodyneConfig HomodyneConfig::with_phase(double theta_LO) const {
  return HomodyneConfig(lo_mode_, N_LO_, theta_LO, N_);
}

Field lo_profile(const Field& signal_mode) {
  complex s{0.0, 0.0};
  for (const auto& v : signal_mode.values()) s += v * v;
  double psi = 0.5 * std::arg(s);
  if (psi <= -0.5 * kPi + 1e-12) psi += kPi;
  return signal_mode.scaled(std::polar(1.0, -psi));
}

HomodyneConfig matched_homodyne(const ImageModel& model, const TransverseGrid& grid,
                                double N, std::optional<double> N_LO) {
  Field lo = lo_profile(signal_mode(model, grid));
  HomodyneConfig config(std::move(lo), N_LO.value_or(kDefaultLoRatio * N), 0.0, N);
  return config.with_phase(tune_phase(config, model));
}

double mean_difference_signal(const HomodyneConfig& config, const ImageModel& model,
                              double p) {
  const Field mode = mode_at(model, config.grid(), p);
  const complex overlap = inner_product(config.lo_mode(), mode);
  return amplitude_scale(config) * (lo_weight(config) * overlap).real();
}

double homodyne_slope(const HomodyneConfig& config, const ImageModel& model) {
  const Field d = mode_derivative(model, config.grid());
  return amplitude_scale(config) * (lo_weight(config) * inner_product(config.lo_mode(), d)).real();
}

double tune_phase(const HomodyneConfig& config, const ImageModel& model) {
  const Field d = mode_derivative(model, config.grid());
  const complex overlap = inner_product(config.lo_mode(), d);
  if (std::abs(overlap) == 0.0) throw_numeric("parameter not encoded");
  return std::arg(overlap);
}

double scan_phase(const HomodyneConfig& config, const ImageModel& model, int samples) {
  const Field d = mode_derivative(model, config.grid());
  const complex overlap = inner_product(config.lo_mode(), d);
  double best_theta = 0.0;
  double best = -kInfinity;
  for (int j = 0; j < samples; ++j) {
    const double theta = -kPi + 2.0 * kPi * j / samples;
    const double slope = (std::polar(1.0, -theta) * overlap).real();
    if (slope > best) {
      best = slope;
      best_theta = theta;
    }
  }
  return best_theta;
}

DetectionReport homodyne_report(const HomodyneConfig& config, const ImageModel& model,
                                double sigma_P, double p, bool squeezed_signal_mode) {
  if (squeezed_signal_mode) {
    const Field u_E = signal_mode(model, config.grid());
    // Distance minimized over a global phase: sqrt(2 - 2 |<lo, u_E>|).
    const double overlap = std::abs(inner_product(config.lo_mode(), u_E));
    const double dist = std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap));
    if (dist > 1e-6) throw_invalid("squeezing not mode-matched");
  }
  const double signal = mean_difference_signal(config, model, p);
  const double variance = config.N_LO() * (squeezed_signal_mode ? sigma_P * sigma_P : 1.0);
  const double slope = homodyne_slope(config, model);
  const double p_min = slope != 0.0 ? std::sqrt(variance) / std::abs(slope) : kInfinity;
  return DetectionReport{signal, variance, signal * signal / variance, slope, p_min};
}

}  // namespace qlimits
