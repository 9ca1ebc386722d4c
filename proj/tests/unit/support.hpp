#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "popowicz/grid.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;

inline double max_diff(const popowicz::Field& a, const popowicz::Field& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double rel_diff(const popowicz::Field& a, const popowicz::Field& b) {
  return max_diff(a, b) / std::max(b.max_abs(), 1e-300);
}

// Random trigonometric polynomial with modes 0..k_max, sampled directly.
inline popowicz::Field random_trig(const popowicz::Grid& grid, int k_max, std::uint64_t seed, double decay = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(k_max + 1), b(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    const double w = std::pow(1.0 + k, -decay);
    a[k] = w * g(rng);
    b[k] = k == 0 ? 0.0 : w * g(rng);
  }
  const double L = grid.period();
  return popowicz::Field::sample(grid, [&](double x) {
    double s = 0.0;
    for (int k = 0; k <= k_max; ++k) {
      const double t = 2.0 * kPi * k * x / L;
      s += a[k] * std::cos(t) + b[k] * std::sin(t);
    }
    return s;
  });
}

}  // namespace testing
