#include "qlimits/transverse.hpp"

#include <cmath>

#include "qlimits/error.hpp"

namespace qlimits {

TransverseGrid::TransverseGrid(int dimension, double extent,
                               std::size_t points_per_axis)
    : dimension_(dimension), extent_(extent), points_(points_per_axis) {
  if (dimension != 1 && dimension != 2) {
    throw_invalid("grid dimension must be 1 or 2");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw_invalid("grid extent must be positive");
  }
  if (points_per_axis < kMinPointsPerAxis) {
    throw_invalid("grid needs at least 8 points per axis");
  }
  spacing_ = 2.0 * extent_ / static_cast<double>(points_);
  cell_measure_ = dimension_ == 1 ? spacing_ : spacing_ * spacing_;
}

TransverseGrid TransverseGrid::default_for(double waist, int dimension) {
  return TransverseGrid(dimension, 6.0 * waist, dimension == 1 ? 256 : 128);
}

std::size_t TransverseGrid::size() const noexcept {
  return dimension_ == 1 ? points_ : points_ * points_;
}

TransverseGrid TransverseGrid::refined() const {
  return TransverseGrid(dimension_, extent_, 2 * points_);
}

Field::Field(TransverseGrid grid, std::vector<complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw_invalid("field size does not match grid");
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw_numeric("non-finite field value");
    }
  }
}

Field Field::zeros(const TransverseGrid& grid) {
  return Field(grid, std::vector<complex>(grid.size()));
}

Field Field::sample(const TransverseGrid& grid,
                    const std::function<complex(double, double)>& fn) {
  std::vector<complex> values(grid.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = fn(grid.x(k), grid.y(k));
  }
  return Field(grid, std::move(values));
}

Field Field::scaled(complex factor) const {
  std::vector<complex> out(values_);
  for (auto& v : out) v *= factor;
  return Field(grid_, std::move(out));
}

bool Field::is_real() const noexcept {
  for (const auto& v : values_) {
    if (v.imag() != 0.0) return false;
  }
  return true;
}

complex inner_product(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid())) throw_invalid("incompatible grids");
  complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < f.size(); ++k) {
    acc += std::conj(f[k]) * g[k];
  }
  return acc * f.grid().cell_measure();
}

double norm_sq(const Field& f) {
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  return acc * f.grid().cell_measure();
}

Field normalize(const Field& f) {
  const double n2 = norm_sq(f);
  if (!(n2 > 1e-30)) throw_numeric("null field");
  return f.scaled(1.0 / std::sqrt(n2));
}

double distance(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid())) throw_invalid("incompatible grids");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += std::norm(f[k] - g[k]);
  return std::sqrt(acc * f.grid().cell_measure());
}

}  // namespace qlimits
