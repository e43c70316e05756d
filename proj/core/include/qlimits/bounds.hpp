#pragma once

#include <limits>
#include <optional>

#include "qlimits/models.hpp"

namespace qlimits {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Sensitivities, Fisher informations and Cramer-Rao bounds of one model
/// under one illumination.
///
/// `a` is +inf for families whose intensity profile does not depend on p;
/// u_I is then absent and every intensity-based bound is +inf.
struct SensitivitySummary {
  double a;
  double b;
  std::optional<Field> u_I;  // noise mode of intensity detection
  Field u_E;                 // signal mode of field detection
  double fisher_poisson;
  double fisher_gauss;
  double crb_intensity;  // a sigma_P / (2 sqrt N)
  double crb_field;      // b sigma_P / (2 sqrt N)
};

/// 1/a^2 = integral of (d|u0|/dp)^2. Returns +inf when that integral is below 1e-12.
double compute_a(const ImageModel& model, const TransverseGrid& grid);
/// 1/b^2 = integral of |du0/dp|^2. Throws "parameter not encoded" when below 1e-12.
double compute_b(const ImageModel& model, const TransverseGrid& grid);

/// u_I = normalize(d|u0|/dp). Throws "no intensity noise-mode" when a is infinite.
Field noise_mode(const ImageModel& model, const TransverseGrid& grid);
/// u_E = normalize(du0/dp).
Field signal_mode(const ImageModel& model, const TransverseGrid& grid);

/// The two pieces of the pixelwise Poisson Fisher information,
/// integral of nbar'^2/nbar and integral of nbar'', with nbar = N |u0(., p)|^2
/// differentiated numerically in p.
struct PoissonFisherTerms {
  double score;      // integral of nbar'^2 / nbar
  double curvature;  // integral of nbar''; vanishes when N does not depend on p
  double total() const noexcept { return score - curvature; }
};

PoissonFisherTerms poisson_fisher_terms(const ImageModel& model,
                                        const TransverseGrid& grid, double N);
double fisher_poisson_integral(const ImageModel& model, const TransverseGrid& grid,
                               double N);

/// Closed form 4N / a^2, zero when a is infinite.
double fisher_poisson(const ImageModel& model, const TransverseGrid& grid, double N);
double fisher_poisson(double a, double N) noexcept;

/// Gaussian field-measurement Fisher information with the derivative split
/// into its component in phase with the local mean field (weighted by
/// 1/sigma_P^2) and in quadrature with it (weighted by 1/sigma_Q^2).
double fisher_gauss(const ImageModel& model, const TransverseGrid& grid,
                    const Illumination& illumination);
double fisher_gauss(const ModeExpansion& expansion, const Illumination& illumination);

/// Parameter value at which an ideal measurement with sensitivity
/// `sensitivity` reaches SNR = 1: sensitivity * sigma / (2 sqrt N).
double cramer_rao_limit(double sensitivity, double N, double sigma) noexcept;

SensitivitySummary crb_summary(const ImageModel& model, const TransverseGrid& grid,
                               const Illumination& illumination);

}  // namespace qlimits
