#include "qlimits/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlimits/error.hpp"

namespace qlimits {

namespace {

constexpr double kPi = std::numbers::pi;

// Normalized 1D Gaussian profile of waist w.
double gauss1(double s, double w) {
  return std::pow(2.0 / (kPi * w * w), 0.25) * std::exp(-s * s / (w * w));
}

double transverse_factor(const Point& r, double w) {
  return r.dimension == 2 ? gauss1(r.y, w) : 1.0;
}

void require_waist(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw_invalid("model waist must be positive");
}

double or_default(double p_scale, double fallback) {
  return p_scale > 0.0 ? p_scale : fallback;
}

std::vector<complex> raw_samples(const ImageModel& model,
                                 const TransverseGrid& grid, double p) {
  std::vector<complex> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = model.amplitude(Point{grid.x(k), grid.y(k), grid.dimension()}, p);
    if (!std::isfinite(v[k].real()) || !std::isfinite(v[k].imag())) {
      throw_numeric("model evaluation failed");
    }
  }
  return v;
}

std::vector<complex> central_difference(const ImageModel& model,
                                        const TransverseGrid& grid, double h) {
  const Field plus = mode_at(model, grid, h);
  const Field minus = mode_at(model, grid, -h);
  std::vector<complex> d(grid.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = (plus[k] - minus[k]) / (2.0 * h);
  return d;
}

double l2(const std::vector<complex>& v, double dA) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return std::sqrt(acc * dA);
}

Field finite_difference_derivative(const ImageModel& model, const TransverseGrid& grid) {
  const double h = derivative_step(model);
  const auto coarse = central_difference(model, grid, h);
  const auto fine = central_difference(model, grid, h / 10.0);

  std::vector<complex> diff(coarse.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = coarse[k] - fine[k];
  const double dA = grid.cell_measure();
  const double scale = std::max(l2(coarse, dA), l2(fine, dA));
  // Below this the family does not move at all and both estimates are
  // rounding noise of order eps / h.
  const double noise_floor = 1e-7 / model.p_scale();
  if (scale > noise_floor && l2(diff, dA) > 1e-3 * scale) {
    throw_numeric("derivative unreliable");
  }

  // Richardson combination of the two central differences (error O(h^4)).
  std::vector<complex> out(coarse.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = (100.0 * fine[k] - coarse[k]) / 99.0;
  }
  return Field(grid, std::move(out));
}

}  // namespace

ImageModel::ImageModel(std::string name, double waist, double p_scale,
                       AmplitudeFn amplitude, DerivativeFn derivative)
    : name_(std::move(name)),
      waist_(waist),
      p_scale_(p_scale),
      amplitude_(std::move(amplitude)),
      derivative_(std::move(derivative)) {
  require_waist(waist_);
  if (!(p_scale_ > 0.0) || !std::isfinite(p_scale_)) {
    throw_invalid("model p_scale must be positive");
  }
  if (!amplitude_) throw_invalid("model needs an evaluator");
}

ImageModel ImageModel::with_finite_differences() const {
  return ImageModel(name_, waist_, p_scale_, amplitude_);
}

Illumination::Illumination(double N, double sigma_P, double sigma_Q)
    : N_(N), sigma_P_(sigma_P), sigma_Q_(sigma_Q) {
  if (!(N > 0.0) || !std::isfinite(N)) throw_invalid("N must be positive");
  if (!(sigma_P > 0.0) || !(sigma_Q > 0.0)) throw_invalid("noise sigmas must be positive");
  if (sigma_P * sigma_Q < 1.0 - 1e-12) {
    throw_invalid("sigma_P * sigma_Q must be at least 1 (Heisenberg)");
  }
}

Illumination Illumination::from_variances(double N, double sigma_P2, double sigma_Q2) {
  if (!(sigma_P2 > 0.0) || !(sigma_Q2 > 0.0)) throw_invalid("noise variances must be positive");
  return Illumination(N, std::sqrt(sigma_P2), std::sqrt(sigma_Q2));
}

ImageModel displaced_gaussian(double w, double p_scale) {
  require_waist(w);
  return ImageModel(
      "displaced_gaussian", w, or_default(p_scale, w / 10.0),
      [w](const Point& r, double p) -> complex {
        return gauss1(r.x - p, w) * transverse_factor(r, w);
      },
      [w](const Point& r) -> complex {
        return 2.0 * r.x / (w * w) * gauss1(r.x, w) * transverse_factor(r, w);
      });
}

ImageModel waist_scaled_gaussian(double w, double p_scale) {
  require_waist(w);
  return ImageModel(
      "waist_scaled_gaussian", w, or_default(p_scale, 0.1),
      [w](const Point& r, double p) -> complex {
        const double W = w * (1.0 + p);
        return gauss1(r.x, W) * (r.dimension == 2 ? gauss1(r.y, W) : 1.0);
      },
      [w](const Point& r) -> complex {
        const double r2 = r.x * r.x + (r.dimension == 2 ? r.y * r.y : 0.0);
        const double u0 = gauss1(r.x, w) * transverse_factor(r, w);
        return u0 * (2.0 * r2 / (w * w) - 0.5 * r.dimension);
      });
}

ImageModel phase_tilt(double w, double kappa, double p_scale) {
  require_waist(w);
  if (!std::isfinite(kappa)) throw_invalid("kappa must be finite");
  return ImageModel(
      "phase_tilt", w, or_default(p_scale, w / 10.0),
      [w, kappa](const Point& r, double p) -> complex {
        const double u0 = gauss1(r.x, w) * transverse_factor(r, w);
        return u0 * std::polar(1.0, kappa * p * r.x);
      },
      [w, kappa](const Point& r) -> complex {
        const double u0 = gauss1(r.x, w) * transverse_factor(r, w);
        return complex{0.0, kappa * r.x * u0};
      });
}

ImageModel custom(std::string name, AmplitudeFn amplitude, double w, double p_scale) {
  require_waist(w);
  return ImageModel(std::move(name), w, or_default(p_scale, w / 10.0), std::move(amplitude));
}

ImageModel custom(std::string name, const Expression& expression, double w,
                  double p_scale) {
  return custom(
      std::move(name),
      [expression, w](const Point& r, double p) {
        return expression.evaluate(r.x, r.y, p, w);
      },
      w, p_scale);
}

ModeEvaluation evaluate_mode(const ImageModel& model, const TransverseGrid& grid, double p) {
  Field raw(grid, raw_samples(model, grid, p));
  return ModeEvaluation{normalize(raw), std::abs(p) > model.p_scale()};
}

Field mode_at(const ImageModel& model, const TransverseGrid& grid, double p) {
  return evaluate_mode(model, grid, p).mode;
}

double derivative_step(const ImageModel& model) noexcept {
  return 1e-4 * model.p_scale();
}

ModeExpansion expand_mode(const ImageModel& model, const TransverseGrid& grid) {
  Field mode = mode_at(model, grid, 0.0);
  Field derivative = model.derivative_mode() == DerivativeMode::analytic
                         ? Field::sample(grid,
                                         [&](double x, double y) {
                                           return model.analytic_derivative()(
                                               Point{x, y, grid.dimension()});
                                         })
                         : finite_difference_derivative(model, grid);

  double max_abs = 0.0;
  for (const auto& v : mode.values()) max_abs = std::max(max_abs, std::abs(v));
  const double floor = kModulusFloor * max_abs;

  std::vector<complex> md(grid.size());
  std::optional<Field> plus, minus;
  for (std::size_t k = 0; k < md.size(); ++k) {
    const double m = std::abs(mode[k]);
    if (m >= floor && m > 0.0) {
      md[k] = (std::conj(mode[k]) * derivative[k]).real() / m;
      continue;
    }
    // Tail cells: the quotient underflows. Use |du0/dp| with the sign of
    // the outward difference quotient of |u0|.
    if (!plus) {
      const double h = derivative_step(model);
      plus = mode_at(model, grid, h);
      minus = mode_at(model, grid, -h);
    }
    const double dq = std::abs((*plus)[k]) - std::abs((*minus)[k]);
    const double sign = dq > 0.0 ? 1.0 : (dq < 0.0 ? -1.0 : 0.0);
    md[k] = sign * std::abs(derivative[k]);
  }
  Field modulus(grid, std::move(md));
  return ModeExpansion{std::move(mode), std::move(derivative), std::move(modulus)};
}

Field mode_derivative(const ImageModel& model, const TransverseGrid& grid) {
  return expand_mode(model, grid).derivative;
}

Field modulus_derivative(const ImageModel& model, const TransverseGrid& grid) {
  return expand_mode(model, grid).modulus_derivative;
}

}  // namespace qlimits
