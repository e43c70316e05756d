#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracle.hpp"
#include "qlimits/error.hpp"
#include "qlimits/models.hpp"

using namespace qlimits;

namespace {

double max_abs_diff(const Field& f, const std::function<complex(double, double)>& want) {
  double worst = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    worst = std::max(worst, std::abs(f[k] - want(f.grid().x(k), f.grid().y(k))));
  }
  return worst;
}

// Closed-form waist-scaled Gaussian, independent of the library evaluator.
double waist_scaled(double x, double w, double p) {
  const double wp = w * (1 + p);
  return std::pow(2.0 / (std::numbers::pi * wp * wp), 0.25) * std::exp(-x * x / (wp * wp));
}

}  // namespace

TEST(ModeAt, DisplacedGaussianAtOrigin) {
  const auto grid = TransverseGrid::default_for(1.0);
  const Field u0 = mode_at(displaced_gaussian(1.0), grid, 0.0);
  EXPECT_LT(max_abs_diff(u0, [](double x, double) { return oracle::gaussian(x, 1.0); }), 1e-12);
}

TEST(ModeAt, PhaseTiltKeepsModulus) {
  const auto model = phase_tilt(1.0, 1.0);
  const auto grid = TransverseGrid::default_for(1.0);
  const Field a = mode_at(model, grid, 0.0);
  const Field b = mode_at(model, grid, 0.3);
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(std::abs(a[k]), std::abs(b[k]), 1e-12);
}

TEST(ModeAt, DisplacedOverlap) {
  const auto model = displaced_gaussian(1.0);
  const auto grid = TransverseGrid::default_for(1.0);
  const double got = std::abs(inner_product(mode_at(model, grid, 0.0), mode_at(model, grid, 0.5)));
  const double quad = oracle::simpson(
      [](double x) { return oracle::gaussian(x, 1.0) * oracle::gaussian(x - 0.5, 1.0); }, -12, 12);
  EXPECT_NEAR(quad, std::exp(-0.125), 1e-9);
  EXPECT_NEAR(got, quad, 1e-4);
}

TEST(ModeAt, OutsideScaleFlag) {
  const auto model = displaced_gaussian(1.0);
  const auto grid = TransverseGrid::default_for(1.0);
  EXPECT_FALSE(evaluate_mode(model, grid, 0.05).outside_scale);
  EXPECT_TRUE(evaluate_mode(model, grid, 0.5).outside_scale);
}

TEST(ModeAt, NonFiniteEvaluator) {
  const auto model = custom("bad", [](const Point& r, double) { return complex(r.x > 1 ? std::nan("") : 1.0); }, 1.0);
  try {
    mode_at(model, TransverseGrid::default_for(1.0), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "model evaluation failed");
  }
}

TEST(ModeAt, ExpressionMatchesBuiltIn) {
  const auto grid = TransverseGrid::default_for(1.5);
  const auto text = custom("text", Expression::compile("exp(-(x-p)^2/w^2)"), 1.5);
  const auto builtin = displaced_gaussian(1.5);
  for (double p : {0.0, 0.07}) EXPECT_LT(distance(mode_at(text, grid, p), mode_at(builtin, grid, p)), 1e-12);
}

TEST(ModeDerivative, DisplacedGaussian) {
  const auto grid = TransverseGrid::default_for(1.0);
  const auto want = [](double x, double) { return 2 * x * oracle::gaussian(x, 1.0); };
  const auto model = displaced_gaussian(1.0);
  EXPECT_EQ(model.derivative_mode(), DerivativeMode::analytic);
  EXPECT_LT(max_abs_diff(mode_derivative(model, grid), want), 1e-6);
  const auto fd = model.with_finite_differences();
  EXPECT_EQ(fd.derivative_mode(), DerivativeMode::finite_difference);
  EXPECT_LT(max_abs_diff(mode_derivative(fd, grid), want), 1e-6);
}

TEST(ModeDerivative, PhaseTilt) {
  for (double kappa : {1.0, 2.5}) {
    const auto grid = TransverseGrid::default_for(1.0);
    const auto want = [kappa](double x, double) { return complex(0, kappa * x) * oracle::gaussian(x, 1.0); };
    const auto model = phase_tilt(1.0, kappa);
    EXPECT_LT(max_abs_diff(mode_derivative(model, grid), want), 1e-6);
    EXPECT_LT(max_abs_diff(mode_derivative(model.with_finite_differences(), grid), want), 1e-6);
  }
}

TEST(ModeDerivative, ConstantFamilyIsZero) {
  const auto model = custom("flat", [](const Point& r, double) { return complex(std::exp(-r.x * r.x)); }, 1.0);
  const Field d = mode_derivative(model, TransverseGrid::default_for(1.0));
  EXPECT_EQ(norm_sq(d), 0.0);
}

TEST(ModeDerivative, UnstableFamilyIsRejected) {
  const auto model = custom("jitter", [](const Point& r, double p) {
    return complex(std::exp(-std::pow(r.x - 0.2 * std::sin(3e6 * p), 2)));
  }, 1.0);
  try {
    mode_derivative(model, TransverseGrid::default_for(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "derivative unreliable");
  }
}

TEST(ModulusDerivative, PhaseTiltIsZero) {
  const Field d = modulus_derivative(phase_tilt(1.0, 1.0), TransverseGrid::default_for(1.0));
  EXPECT_LT(std::sqrt(norm_sq(d)), 1e-9);
}

TEST(ModulusDerivative, DisplacedGaussian) {
  const auto grid = TransverseGrid::default_for(1.0);
  const Field d = modulus_derivative(displaced_gaussian(1.0), grid);
  EXPECT_TRUE(d.is_real());
  EXPECT_LT(max_abs_diff(d, [](double x, double) { return 2 * x * oracle::gaussian(x, 1.0); }), 1e-6);
}

TEST(ModulusDerivative, WaistScaledTwoStepOracle) {
  const double w = 1.0;
  const auto grid = TransverseGrid::default_for(w);
  for (const auto& model : {waist_scaled_gaussian(w), waist_scaled_gaussian(w).with_finite_differences()}) {
    const Field d = modulus_derivative(model, grid);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = grid.x(k);
      const double h1 = 1e-4, h2 = 1e-5;
      const double fd1 = (waist_scaled(x, w, h1) - waist_scaled(x, w, -h1)) / (2 * h1);
      const double fd2 = (waist_scaled(x, w, h2) - waist_scaled(x, w, -h2)) / (2 * h2);
      ASSERT_NEAR(fd1, fd2, 1e-5 * (1 + std::abs(fd2)));
      err = std::max(err, std::abs(d[k].real() - fd2));
      scale = std::max(scale, std::abs(fd2));
    }
    EXPECT_LT(err / scale, 1e-5) << model.name();
  }
}

TEST(ModulusDerivative, TwoDimensionalWaistScale) {
  const auto grid = TransverseGrid::default_for(1.0, 2);
  const auto model = waist_scaled_gaussian(1.0);
  const Field analytic = mode_derivative(model, grid);
  const Field fd = mode_derivative(model.with_finite_differences(), grid);
  EXPECT_LT(distance(analytic, fd), 1e-6);
  // Norm preservation: Re<u0, du0> = 0.
  EXPECT_NEAR(inner_product(mode_at(model, grid, 0.0), analytic).real(), 0.0, 1e-9);
}

TEST(ExpandMode, ConsistentWithSeparateCalls) {
  const auto model = phase_tilt(1.2, 0.7);
  const auto grid = TransverseGrid::default_for(1.2);
  const auto e = expand_mode(model, grid);
  EXPECT_LT(distance(e.mode, mode_at(model, grid, 0.0)), 1e-15);
  EXPECT_LT(distance(e.derivative, mode_derivative(model, grid)), 1e-15);
  EXPECT_LT(distance(e.modulus_derivative, modulus_derivative(model, grid)), 1e-15);
}

TEST(Illumination, Heisenberg) {
  EXPECT_NO_THROW(Illumination(100, std::sqrt(0.5), std::sqrt(2.0)));
  EXPECT_THROW(Illumination(100, 0.5, 1.0), Error);
  EXPECT_THROW(Illumination(0.0), Error);
  const auto ill = Illumination::from_variances(10, 0.25, 4.0);
  EXPECT_DOUBLE_EQ(ill.sigma_P(), 0.5);
  EXPECT_DOUBLE_EQ(ill.sigma_Q(), 2.0);
}

TEST(Models, DefaultScales) {
  EXPECT_DOUBLE_EQ(displaced_gaussian(2.0).p_scale(), 0.2);
  EXPECT_DOUBLE_EQ(phase_tilt(2.0, 1.0).p_scale(), 0.2);
  EXPECT_DOUBLE_EQ(waist_scaled_gaussian(2.0).p_scale(), 0.1);
  EXPECT_DOUBLE_EQ(derivative_step(displaced_gaussian(2.0)), 2e-5);
  EXPECT_THROW(displaced_gaussian(-1.0), Error);
}
