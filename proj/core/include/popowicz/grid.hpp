#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace popowicz {

/// Thrown when a caller hands an operation something it cannot accept:
/// non-finite samples, mismatched grids, parameters out of range.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic grid on [0, period) with nodes x_i = i * period / n.
class Grid {
 public:
  Grid(std::size_t n_points, double period);

  std::size_t size() const noexcept { return n_; }
  double period() const noexcept { return period_; }
  double spacing() const noexcept { return period_ / static_cast<double>(n_); }
  double node(std::size_t i) const noexcept { return static_cast<double>(i) * spacing(); }
  std::vector<double> nodes() const;

  /// Number of independent real-to-complex modes, n/2 + 1.
  std::size_t mode_count() const noexcept { return n_ / 2 + 1; }
  /// Angular wavenumber 2*pi*mode/period of a nonnegative mode index.
  double wavenumber(std::size_t mode) const noexcept;
  /// k_max = pi * n / period.
  double nyquist_wavenumber() const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
  double period_;
};

/// Real samples of a periodic function, one per grid node.
class Field {
 public:
  Field(Grid grid, std::vector<double> values);

  static Field zeros(const Grid& grid);
  static Field constant(const Grid& grid, double value);
  static Field sample(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool is_finite() const noexcept;
  /// Throws InvalidInput naming `what` when any sample is NaN or infinite.
  void require_valid(std::string_view what) const;

  double max_abs() const noexcept;
  double min() const noexcept;
  double max() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double scale) noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, double scale);
Field operator*(double scale, Field a);
/// Pointwise product.
Field operator*(const Field& a, const Field& b);

void require_same_grid(const Field& a, const Field& b, std::string_view context);

double max_abs_difference(const Field& a, const Field& b);
/// Rectangle-rule integral over one period; exact for trigonometric
/// polynomials resolved by the grid.
double grid_integral(const Field& f);
/// Grid-quadrature L^p norm; p = infinity gives the max norm.
double lp_norm(const Field& f, double p);

}  // namespace popowicz
