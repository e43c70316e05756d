#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qlimits {

using complex = std::complex<double>;

/// Uniform midpoint discretization of the transverse plane, 1D or 2D.
///
/// Sample k sits at the midpoint of its cell; for 2D grids k = iy * n + ix.
/// All integrals over the plane become weighted sums with the constant
/// weight cell_measure().
class TransverseGrid {
 public:
  static constexpr std::size_t kMinPointsPerAxis = 8;

  TransverseGrid(int dimension, double extent, std::size_t points_per_axis);

  /// extent = 6 waists, 256 points (1D) or 128 points per axis (2D).
  static TransverseGrid default_for(double waist, int dimension = 1);

  int dimension() const noexcept { return dimension_; }
  double extent() const noexcept { return extent_; }
  std::size_t points_per_axis() const noexcept { return points_; }
  double spacing() const noexcept { return spacing_; }
  double cell_measure() const noexcept { return cell_measure_; }
  std::size_t size() const noexcept;

  double axis_coordinate(std::size_t i) const noexcept {
    return -extent_ + (static_cast<double>(i) + 0.5) * spacing_;
  }
  double x(std::size_t k) const noexcept {
    return axis_coordinate(dimension_ == 1 ? k : k % points_);
  }
  double y(std::size_t k) const noexcept {
    return dimension_ == 1 ? 0.0 : axis_coordinate(k / points_);
  }

  /// Same grid with twice the points per axis.
  TransverseGrid refined() const;

  friend bool operator==(const TransverseGrid&, const TransverseGrid&) = default;

 private:
  int dimension_;
  double extent_;
  std::size_t points_;
  double spacing_;
  double cell_measure_;
};

/// Complex amplitude sampled on a grid. Immutable once built.
class Field {
 public:
  /// Throws if values.size() differs from grid.size() or any value is
  /// not finite.
  Field(TransverseGrid grid, std::vector<complex> values);

  static Field zeros(const TransverseGrid& grid);
  static Field sample(const TransverseGrid& grid,
                      const std::function<complex(double x, double y)>& fn);

  const TransverseGrid& grid() const noexcept { return grid_; }
  std::span<const complex> values() const noexcept { return values_; }
  const complex& operator[](std::size_t k) const noexcept { return values_[k]; }
  std::size_t size() const noexcept { return values_.size(); }

  Field scaled(complex factor) const;
  /// True when every sample has zero imaginary part.
  bool is_real() const noexcept;

 private:
  TransverseGrid grid_;
  std::vector<complex> values_;
};

/// sum_k conj(f_k) g_k dA. Conjugate-linear in f, linear in g.
complex inner_product(const Field& f, const Field& g);

double norm_sq(const Field& f);

/// Returns f / sqrt(norm_sq(f)); throws "null field" when norm_sq <= 1e-30.
Field normalize(const Field& f);

/// L2 distance sqrt(norm_sq(f - g)).
double distance(const Field& f, const Field& g);

}  // namespace qlimits
