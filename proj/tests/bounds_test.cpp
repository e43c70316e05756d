#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qlimits/bounds.hpp"
#include "qlimits/error.hpp"

using namespace qlimits;
using oracle::relative;

TEST(ComputeA, DisplacedGaussianEqualsWaist) {
  for (double w : {0.5, 1.0, 2.0}) {
    const double want = 1.0 / std::sqrt(oracle::displaced_inv_a2(w));
    EXPECT_NEAR(want, w, 1e-9);
    const double a = compute_a(displaced_gaussian(w), TransverseGrid::default_for(w));
    EXPECT_LT(relative(a, want), 1e-5) << "w = " << w;
  }
}

TEST(ComputeA, PhaseTiltIsInfinite) {
  EXPECT_EQ(compute_a(phase_tilt(1.0, 1.0), TransverseGrid::default_for(1.0)), kInfinity);
}

TEST(ComputeA, WaistScaledOneAndTwoDimensions) {
  const double inv1 = oracle::simpson([](double x) {
    const double u = oracle::gaussian(x, 1.0);
    const double d = u * (2 * x * x - 0.5);
    return d * d;
  }, -12, 12);
  const double a1 = compute_a(waist_scaled_gaussian(1.0), TransverseGrid::default_for(1.0));
  EXPECT_LT(relative(a1, 1 / std::sqrt(inv1)), 1e-5);

  const double inv2 = oracle::simpson2([](double x, double y) {
    const double r2 = x * x + y * y;
    const double u = oracle::gaussian(x, 1.0) * oracle::gaussian(y, 1.0);
    const double d = u * (2 * r2 - 1.0);
    return d * d;
  }, 7.0);
  const double a2 = compute_a(waist_scaled_gaussian(1.0), TransverseGrid::default_for(1.0, 2));
  EXPECT_LT(relative(a2, 1 / std::sqrt(inv2)), 1e-5);
}

TEST(ComputeB, Values) {
  EXPECT_LT(relative(compute_b(displaced_gaussian(1.0), TransverseGrid::default_for(1.0)), 1.0), 1e-5);
  for (double kappa : {1.0, 3.0}) {
    const double want = 1.0 / std::sqrt(oracle::tilt_inv_b2(1.0, kappa));
    EXPECT_NEAR(want, 2.0 / kappa, 1e-9);
    EXPECT_LT(relative(compute_b(phase_tilt(1.0, kappa), TransverseGrid::default_for(1.0)), want), 1e-5);
  }
}

TEST(ComputeB, ParameterNotEncoded) {
  const auto flat = custom("flat", [](const Point& r, double) { return complex(std::exp(-r.x * r.x)); }, 1.0);
  try {
    compute_b(flat, TransverseGrid::default_for(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "parameter not encoded");
  }
}

TEST(NoiseMode, FirstHermiteGauss) {
  const auto grid = TransverseGrid::default_for(1.0);
  const Field uI = noise_mode(displaced_gaussian(1.0), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(uI[k].real(), 2 * grid.x(k) * oracle::gaussian(grid.x(k), 1.0), 1e-5);
  }
}

TEST(NoiseMode, WaistScaledIsEvenAndOrthogonal) {
  const auto grid = TransverseGrid::default_for(1.0);
  const auto model = waist_scaled_gaussian(1.0);
  const Field uI = noise_mode(model, grid);
  const std::size_t n = grid.size();
  for (std::size_t k = 0; k < n / 2; ++k) EXPECT_NEAR(uI[k].real(), uI[n - 1 - k].real(), 1e-12);
  EXPECT_NEAR(std::abs(inner_product(mode_at(model, grid, 0.0), uI)), 0.0, 1e-6);
}

TEST(NoiseMode, AbsentForPureTilt) {
  try {
    noise_mode(phase_tilt(1.0, 1.0), TransverseGrid::default_for(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no intensity noise-mode");
  }
}

TEST(SignalMode, RealFamilyMatchesNoiseMode) {
  const auto grid = TransverseGrid::default_for(1.0);
  const auto model = displaced_gaussian(1.0);
  EXPECT_LT(distance(signal_mode(model, grid), noise_mode(model, grid)), 1e-9);
}

TEST(SignalMode, TiltIsInQuadrature) {
  const auto grid = TransverseGrid::default_for(1.0);
  const Field uE = signal_mode(phase_tilt(1.0, 1.0), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid.x(k);
    EXPECT_NEAR(std::abs(uE[k] - complex(0, 2 * x * oracle::gaussian(x, 1.0))), 0.0, 1e-5);
  }
}

TEST(PoissonFisher, IntegralFormMatchesClosedForm) {
  const auto grid = TransverseGrid::default_for(1.0);
  const double N = 1e4;
  EXPECT_LT(relative(fisher_poisson_integral(displaced_gaussian(1.0), grid, N), 4e4), 1e-3);
  const auto terms = poisson_fisher_terms(displaced_gaussian(1.0), grid, N);
  EXPECT_LT(std::abs(terms.curvature), 1e-6 * N);
  EXPECT_NEAR(fisher_poisson_integral(phase_tilt(1.0, 1.0), grid, N), 0.0, 1e-6 * N);
}

TEST(PoissonFisher, ClosedForm) {
  EXPECT_DOUBLE_EQ(fisher_poisson(1.0, 1e6), 4e6);
  EXPECT_EQ(fisher_poisson(kInfinity, 1e6), 0.0);
}

TEST(GaussFisher, Values) {
  const auto grid = TransverseGrid::default_for(1.0);
  const double N = 1e4;
  EXPECT_LT(relative(fisher_gauss(displaced_gaussian(1.0), grid, Illumination(N)), 4e4), 1e-3);
  const auto squeezed = Illumination::from_variances(N, 0.5, 2.0);
  EXPECT_LT(relative(fisher_gauss(displaced_gaussian(1.0), grid, squeezed), 8e4), 1e-3);
  EXPECT_LT(relative(fisher_gauss(phase_tilt(1.0, 1.0), grid, Illumination(N)), 1e4), 1e-3);
  // Tilt information lives in the phase quadrature.
  EXPECT_LT(relative(fisher_gauss(phase_tilt(1.0, 1.0), grid, squeezed), 5e3), 1e-3);
}

TEST(CrbSummary, PlugInValues) {
  const auto grid = TransverseGrid::default_for(1.0);
  const auto s = crb_summary(displaced_gaussian(1.0), grid, Illumination(1e6));
  EXPECT_NEAR(s.crb_intensity, 5e-4, 5e-4 * 1e-5);
  EXPECT_NEAR(s.crb_field, 5e-4, 5e-4 * 1e-5);
  EXPECT_DOUBLE_EQ(cramer_rao_limit(1.0, 1e6, 1.0), 5e-4);

  const auto sq = crb_summary(displaced_gaussian(1.0), grid, Illumination::from_variances(1e6, 0.25, 4.0));
  EXPECT_LT(relative(sq.crb_intensity, s.crb_intensity / 2), 1e-12);
  EXPECT_LT(relative(sq.crb_field, s.crb_field / 2), 1e-12);
}

TEST(CrbSummary, TiltHasNoIntensityBound) {
  const auto s = crb_summary(phase_tilt(1.0, 1.0), TransverseGrid::default_for(1.0), Illumination(1e4));
  EXPECT_EQ(s.a, kInfinity);
  EXPECT_EQ(s.crb_intensity, kInfinity);
  EXPECT_FALSE(s.u_I.has_value());
  EXPECT_TRUE(std::isfinite(s.crb_field));
  EXPECT_EQ(s.fisher_poisson, 0.0);
}

TEST(CrbSummary, GridConvergence) {
  for (const auto& model : {displaced_gaussian(1.0), waist_scaled_gaussian(1.0), phase_tilt(1.0, 1.0)}) {
    const auto grid = TransverseGrid::default_for(1.0);
    const auto coarse = crb_summary(model, grid, Illumination(1e6));
    const auto fine = crb_summary(model, grid.refined(), Illumination(1e6));
    for (auto [c, f] : {std::pair{coarse.b, fine.b}, {coarse.crb_field, fine.crb_field},
                        {coarse.fisher_gauss, fine.fisher_gauss}}) {
      EXPECT_LT(relative(c, f), 1e-6) << model.name();
    }
    if (std::isfinite(coarse.a)) EXPECT_LT(relative(coarse.a, fine.a), 1e-6) << model.name();
  }
}
