#pragma once

#include <functional>
#include <optional>
#include <string>

#include "qlimits/expression.hpp"
#include "qlimits/transverse.hpp"

namespace qlimits {

/// A transverse position handed to model evaluators. `dimension` lets a
/// separable model decide whether to include its y factor.
struct Point {
  double x;
  double y;
  int dimension;
};

/// u0(r, p), the mean-field transverse profile as a function of the parameter.
using AmplitudeFn = std::function<complex(const Point& r, double p)>;
/// Closed-form d u0 / dp at p = 0.
using DerivativeFn = std::function<complex(const Point& r)>;

enum class DerivativeMode { analytic, finite_difference };

/// A parametrized image family p -> u0(., p).
///
/// Evaluators must be pure. They need not be exactly normalized on a given
/// grid: mode_at() renormalizes every evaluation so the detected photon
/// number never depends on p.
class ImageModel {
 public:
  ImageModel(std::string name, double waist, double p_scale,
             AmplitudeFn amplitude, DerivativeFn derivative = {});

  const std::string& name() const noexcept { return name_; }
  double waist() const noexcept { return waist_; }
  double p_scale() const noexcept { return p_scale_; }
  DerivativeMode derivative_mode() const noexcept {
    return derivative_ ? DerivativeMode::analytic : DerivativeMode::finite_difference;
  }

  complex amplitude(const Point& r, double p) const { return amplitude_(r, p); }
  const DerivativeFn& analytic_derivative() const noexcept { return derivative_; }

  /// Copy that drops the closed-form derivative so every derivative goes
  /// through finite differences.
  ImageModel with_finite_differences() const;

 private:
  std::string name_;
  double waist_;
  double p_scale_;
  AmplitudeFn amplitude_;
  DerivativeFn derivative_;
};

/// Mean photon number and quadrature noise, in shot-noise units.
class Illumination {
 public:
  /// Throws unless N > 0, sigmas > 0 and sigma_P * sigma_Q >= 1.
  explicit Illumination(double N, double sigma_P = 1.0, double sigma_Q = 1.0);
  static Illumination from_variances(double N, double sigma_P2, double sigma_Q2);

  double N() const noexcept { return N_; }
  double sigma_P() const noexcept { return sigma_P_; }
  double sigma_Q() const noexcept { return sigma_Q_; }

 private:
  double N_;
  double sigma_P_;
  double sigma_Q_;
};

// Built-in families. p_scale <= 0 selects the default for the family.

/// (2/(pi w^2))^(1/4) exp(-(x-p)^2/w^2); default p_scale w/10.
ImageModel displaced_gaussian(double w, double p_scale = 0.0);
/// Gaussian whose waist is w (1 + p); p is a relative change, default p_scale 0.1.
ImageModel waist_scaled_gaussian(double w, double p_scale = 0.0);
/// Gaussian times exp(i kappa p x); default p_scale w/10.
ImageModel phase_tilt(double w, double kappa, double p_scale = 0.0);
/// Caller-supplied family; derivatives by finite differences.
ImageModel custom(std::string name, AmplitudeFn amplitude, double w,
                  double p_scale = 0.0);
/// Family authored as text, see Expression for the grammar.
ImageModel custom(std::string name, const Expression& expression, double w,
                  double p_scale = 0.0);

struct ModeEvaluation {
  Field mode;
  bool outside_scale;  // |p| > p_scale: first-order results are suspect
};

/// Normalized u0(., p) on the grid, with the out-of-range flag.
ModeEvaluation evaluate_mode(const ImageModel& model, const TransverseGrid& grid, double p);
/// Normalized u0(., p) on the grid.
Field mode_at(const ImageModel& model, const TransverseGrid& grid, double p);

/// u0 at p = 0 together with its first p-derivatives, computed once.
struct ModeExpansion {
  Field mode;                // u0(., 0), normalized
  Field derivative;          // d u0 / dp
  Field modulus_derivative;  // d|u0| / dp, real
};

ModeExpansion expand_mode(const ImageModel& model, const TransverseGrid& grid);

Field mode_derivative(const ImageModel& model, const TransverseGrid& grid);
Field modulus_derivative(const ImageModel& model, const TransverseGrid& grid);

/// Step used for central differences in p: 1e-4 * p_scale.
double derivative_step(const ImageModel& model) noexcept;

/// Points with |u0| below this fraction of max|u0| use the one-sided
/// modulus rule instead of Re(u0* du0)/|u0|.
inline constexpr double kModulusFloor = 1e-12;

}  // namespace qlimits
