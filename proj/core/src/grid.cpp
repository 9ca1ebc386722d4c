#include "popowicz/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace popowicz {

Grid::Grid(std::size_t n_points, double period) : n_(n_points), period_(period) {
  if (n_points < 8 || n_points % 2 != 0) {
    std::ostringstream msg;
    msg << "grid needs an even number of points >= 8, got " << n_points;
    throw InvalidInput(msg.str());
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw InvalidInput("grid period must be a positive finite number");
  }
}

std::vector<double> Grid::nodes() const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

double Grid::wavenumber(std::size_t mode) const noexcept {
  return 2.0 * std::numbers::pi * static_cast<double>(mode) / period_;
}

double Grid::nyquist_wavenumber() const noexcept {
  return std::numbers::pi * static_cast<double>(n_) / period_;
}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    std::ostringstream msg;
    msg << "field has " << values_.size() << " samples but grid has " << grid_.size() << " nodes";
    throw InvalidInput(msg.str());
  }
}

Field Field::zeros(const Grid& grid) { return Field(grid, std::vector<double>(grid.size(), 0.0)); }

Field Field::constant(const Grid& grid, double value) {
  return Field(grid, std::vector<double>(grid.size(), value));
}

Field Field::sample(const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
  return Field(grid, std::move(v));
}

bool Field::is_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void Field::require_valid(std::string_view what) const {
  if (!is_finite()) {
    throw InvalidInput(std::string(what) + ": field contains non-finite values");
  }
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

double Field::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double scale) noexcept {
  for (double& x : values_) x *= scale;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, double scale) { return a *= scale; }
Field operator*(double scale, Field a) { return a *= scale; }

Field operator*(const Field& a, const Field& b) {
  require_same_grid(a, b, "pointwise product");
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

void require_same_grid(const Field& a, const Field& b, std::string_view context) {
  if (!(a.grid() == b.grid())) {
    throw InvalidInput(std::string(context) + ": fields live on different grids");
  }
}

double max_abs_difference(const Field& a, const Field& b) {
  require_same_grid(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double grid_integral(const Field& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x;
  return sum * f.grid().spacing();
}

double lp_norm(const Field& f, double p) {
  if (std::isinf(p)) return f.max_abs();
  if (!(p >= 1.0)) throw InvalidInput("L^p norm needs p >= 1");
  double sum = 0.0;
  if (p == 2.0) {
    for (double x : f.values()) sum += x * x;
    return std::sqrt(sum * f.grid().spacing());
  }
  if (p == 1.0) {
    for (double x : f.values()) sum += std::abs(x);
    return sum * f.grid().spacing();
  }
  for (double x : f.values()) sum += std::pow(std::abs(x), p);
  return std::pow(sum * f.grid().spacing(), 1.0 / p);
}

}  // namespace popowicz
