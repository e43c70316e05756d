#include "qlimits/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "qlimits/error.hpp"

namespace qlimits {

namespace {

constexpr double kNullDerivative = 1e-12;

double a_from(const ModeExpansion& e) {
  const double inv_a2 = norm_sq(e.modulus_derivative);
  return inv_a2 < kNullDerivative ? kInfinity : 1.0 / std::sqrt(inv_a2);
}

double b_from(const ModeExpansion& e) {
  const double inv_b2 = norm_sq(e.derivative);
  if (inv_b2 < kNullDerivative) throw_numeric("parameter not encoded");
  return 1.0 / std::sqrt(inv_b2);
}

std::vector<double> intensities(const Field& mode, double N) {
  std::vector<double> n(mode.size());
  for (std::size_t k = 0; k < n.size(); ++k) n[k] = N * std::norm(mode[k]);
  return n;
}

PoissonFisherTerms poisson_terms_with_step(const ImageModel& model,
                                           const TransverseGrid& grid, double N,
                                           double h) {
  const auto n0 = intensities(mode_at(model, grid, 0.0), N);
  const auto np = intensities(mode_at(model, grid, h), N);
  const auto nm = intensities(mode_at(model, grid, -h), N);
  const double cutoff = 1e-30 * N;

  double score = 0.0;
  double curvature = 0.0;
  for (std::size_t k = 0; k < n0.size(); ++k) {
    const double d1 = (np[k] - nm[k]) / (2.0 * h);
    const double d2 = (np[k] - 2.0 * n0[k] + nm[k]) / (h * h);
    if (n0[k] >= cutoff && n0[k] > 0.0) score += d1 * d1 / n0[k];
    curvature += d2;
  }
  const double dA = grid.cell_measure();
  return PoissonFisherTerms{score * dA, curvature * dA};
}

}  // namespace

double compute_a(const ImageModel& model, const TransverseGrid& grid) {
  return a_from(expand_mode(model, grid));
}

double compute_b(const ImageModel& model, const TransverseGrid& grid) {
  return b_from(expand_mode(model, grid));
}

Field noise_mode(const ImageModel& model, const TransverseGrid& grid) {
  const auto e = expand_mode(model, grid);
  if (std::isinf(a_from(e))) throw_numeric("no intensity noise-mode");
  return normalize(e.modulus_derivative);
}

Field signal_mode(const ImageModel& model, const TransverseGrid& grid) {
  const auto e = expand_mode(model, grid);
  b_from(e);
  return normalize(e.derivative);
}

PoissonFisherTerms poisson_fisher_terms(const ImageModel& model,
                                        const TransverseGrid& grid, double N) {
  if (!(N > 0.0)) throw_invalid("N must be positive");
  const double h = 1e-3 * model.p_scale();
  const auto fine = poisson_terms_with_step(model, grid, N, h);
  const auto coarse = poisson_terms_with_step(model, grid, N, 2.0 * h);
  const double scale = std::max(std::abs(fine.score), std::abs(coarse.score));
  const double floor = 1e-6 * N / (model.p_scale() * model.p_scale());
  if (std::abs(fine.score - coarse.score) > 1e-3 * scale + floor) {
    throw_numeric("derivative unreliable");
  }
  return fine;
}

double fisher_poisson_integral(const ImageModel& model, const TransverseGrid& grid,
                               double N) {
  return poisson_fisher_terms(model, grid, N).total();
}

double fisher_poisson(double a, double N) noexcept {
  return std::isinf(a) ? 0.0 : 4.0 * N / (a * a);
}

double fisher_poisson(const ImageModel& model, const TransverseGrid& grid, double N) {
  return fisher_poisson(compute_a(model, grid), N);
}

double fisher_gauss(const ModeExpansion& e, const Illumination& illumination) {
  // In the gauge where the local mean field is real, the in-phase part of
  // du0/dp is exactly d|u0|/dp; the rest is the quadrature part.
  const double dA = e.mode.grid().cell_measure();
  double in_phase = 0.0;
  double quadrature = 0.0;
  for (std::size_t k = 0; k < e.mode.size(); ++k) {
    const double p2 = e.modulus_derivative[k].real() * e.modulus_derivative[k].real();
    in_phase += p2;
    quadrature += std::max(0.0, std::norm(e.derivative[k]) - p2);
  }
  const double N = illumination.N();
  const double sP2 = illumination.sigma_P() * illumination.sigma_P();
  const double sQ2 = illumination.sigma_Q() * illumination.sigma_Q();
  return 4.0 * N * dA * (in_phase / sP2 + quadrature / sQ2);
}

double fisher_gauss(const ImageModel& model, const TransverseGrid& grid,
                    const Illumination& illumination) {
  return fisher_gauss(expand_mode(model, grid), illumination);
}

double cramer_rao_limit(double sensitivity, double N, double sigma) noexcept {
  return sensitivity * sigma / (2.0 * std::sqrt(N));
}

SensitivitySummary crb_summary(const ImageModel& model, const TransverseGrid& grid,
                               const Illumination& illumination) {
  const auto e = expand_mode(model, grid);
  const double a = a_from(e);
  const double b = b_from(e);
  const double N = illumination.N();
  const double sP = illumination.sigma_P();

  std::optional<Field> u_I;
  if (!std::isinf(a)) u_I = normalize(e.modulus_derivative);

  return SensitivitySummary{
      a,
      b,
      std::move(u_I),
      normalize(e.derivative),
      fisher_poisson(a, N),
      fisher_gauss(e, illumination),
      cramer_rao_limit(a, N, sP),
      cramer_rao_limit(b, N, sP),
  };
}

}  // namespace qlimits
