#pragma once

#include <complex>
#include <span>
#include <vector>

#include "popowicz/grid.hpp"

namespace popowicz {

/// Half-spectrum of a real field: modes 0..n/2, unnormalized (FFTW r2c
/// convention), so a field of constant value c has spectrum[0] = n*c.
using Spectrum = std::vector<std::complex<double>>;

Spectrum forward_transform(const Field& f);
/// Inverse of forward_transform, including the 1/n normalization.
/// Throws InvalidInput if the mean or Nyquist coefficient carries an
/// imaginary part above 1e-10 of the spectrum's largest magnitude.
Field inverse_transform(const Grid& grid, Spectrum spectrum);

/// Fourier representation of p(x) = exp(-|x|)/2, the Green's function of
/// 1 - d^2/dx^2: symbol 1/(1 + k^2) per mode.
class HelmholtzKernel {
 public:
  explicit HelmholtzKernel(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  double symbol(std::size_t mode) const noexcept { return symbol_[mode]; }
  std::span<const double> symbols() const noexcept { return symbol_; }

 private:
  Grid grid_;
  std::vector<double> symbol_;
};

/// d^order f / dx^order by multiplication with (ik)^order. The Nyquist
/// mode of odd-order derivatives is set to zero.
Field derivative(const Field& f, int order = 1);

/// p * f, i.e. (1 - d^2/dx^2)^{-1} f.
Field helmholtz_inverse(const Field& f, const HelmholtzKernel& kernel);
/// (1 - d^2/dx^2) f.
Field helmholtz_forward(const Field& f);
/// p_x * f, symbol ik/(1 + k^2).
Field kernel_derivative_convolve(const Field& f, const HelmholtzKernel& kernel);

/// Largest mode index kept by a dealiasing cut at fraction * k_max.
std::size_t dealias_cutoff_mode(const Grid& grid, double fraction);
/// Zeroes all modes with |k| > fraction * k_max. fraction must lie in (0, 1].
Field dealias(const Field& f, double fraction);
void dealias_spectrum(Spectrum& spectrum, const Grid& grid, double fraction);

/// L^2 norm computed from the spectral coefficients (Parseval).
double spectral_l2_norm(const Field& f);

/// Trigonometric interpolant of a sampled field, evaluable anywhere on the
/// real line (periodically extended).
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const Field& f);

  double operator()(double x) const;
  /// Evaluates at many points; `out` must have the same length as `xs`.
  void evaluate(std::span<const double> xs, std::span<double> out) const;
  /// Exact integral of the interpolant over [a, b].
  double integral(double a, double b) const;

 private:
  Grid grid_;
  // Normalized one-sided coefficients with the factor 2 for interior modes
  // folded in, truncated after the last nonzero mode.
  std::vector<std::complex<double>> coeffs_;
};

}  // namespace popowicz
