#include "popowicz/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace popowicz {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per size under a lock and kept for the
// life of the process.
const PlanPair& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const int size = static_cast<int>(n);
  std::vector<double> real(n);
  std::vector<std::complex<double>> cplx(n / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair pair;
  pair.forward = fftw_plan_dft_r2c_1d(size, real.data(), c, flags);
  pair.inverse = fftw_plan_dft_c2r_1d(size, c, real.data(), flags);
  return cache.emplace(n, pair).first->second;
}

Spectrum multiply_symbol(const Field& f, const auto& symbol) {
  Spectrum spec = forward_transform(f);
  for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= symbol(j);
  return spec;
}

}  // namespace

Spectrum forward_transform(const Field& f) {
  const std::size_t n = f.size();
  Spectrum out(n / 2 + 1);
  std::vector<double> in(f.values().begin(), f.values().end());
  fftw_execute_dft_r2c(plans_for(n).forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Field inverse_transform(const Grid& grid, Spectrum spectrum) {
  const std::size_t n = grid.size();
  if (spectrum.size() != grid.mode_count()) {
    throw InvalidInput("inverse_transform: spectrum length does not match grid");
  }
  double scale = 0.0;
  for (const auto& c : spectrum) scale = std::max(scale, std::abs(c));
  const double tol = 1e-10 * scale;
  if (std::abs(spectrum.front().imag()) > tol || std::abs(spectrum.back().imag()) > tol) {
    throw InvalidInput("inverse_transform: spectrum is not Hermitian (imaginary mean or Nyquist mode)");
  }
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans_for(n).inverse, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= inv_n;
  return Field(grid, std::move(out));
}

HelmholtzKernel::HelmholtzKernel(const Grid& grid) : grid_(grid), symbol_(grid.mode_count()) {
  for (std::size_t j = 0; j < symbol_.size(); ++j) {
    const double k = grid.wavenumber(j);
    symbol_[j] = 1.0 / (1.0 + k * k);
  }
}

Field derivative(const Field& f, int order) {
  f.require_valid("derivative");
  if (order < 0) throw InvalidInput("derivative: order must be nonnegative");
  const Grid& g = f.grid();
  const std::size_t nyquist = g.mode_count() - 1;
  Spectrum spec = multiply_symbol(f, [&](std::size_t j) {
    if (order % 2 == 1 && j == nyquist) return std::complex<double>(0.0);
    return std::pow(std::complex<double>(0.0, g.wavenumber(j)), order);
  });
  return inverse_transform(g, std::move(spec));
}

Field helmholtz_inverse(const Field& f, const HelmholtzKernel& kernel) {
  f.require_valid("helmholtz_inverse");
  if (!(f.grid() == kernel.grid())) throw InvalidInput("helmholtz_inverse: kernel built for a different grid");
  Spectrum spec = multiply_symbol(f, [&](std::size_t j) { return kernel.symbol(j); });
  return inverse_transform(f.grid(), std::move(spec));
}

Field helmholtz_forward(const Field& f) {
  f.require_valid("helmholtz_forward");
  const Grid& g = f.grid();
  Spectrum spec = multiply_symbol(f, [&](std::size_t j) {
    const double k = g.wavenumber(j);
    return 1.0 + k * k;
  });
  return inverse_transform(g, std::move(spec));
}

Field kernel_derivative_convolve(const Field& f, const HelmholtzKernel& kernel) {
  f.require_valid("kernel_derivative_convolve");
  if (!(f.grid() == kernel.grid())) {
    throw InvalidInput("kernel_derivative_convolve: kernel built for a different grid");
  }
  const Grid& g = f.grid();
  const std::size_t nyquist = g.mode_count() - 1;
  Spectrum spec = multiply_symbol(f, [&](std::size_t j) {
    if (j == nyquist) return std::complex<double>(0.0);
    return std::complex<double>(0.0, g.wavenumber(j) * kernel.symbol(j));
  });
  return inverse_transform(g, std::move(spec));
}

std::size_t dealias_cutoff_mode(const Grid& grid, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidInput("dealias fraction must lie in (0, 1]");
  }
  // |k_j| <= fraction * k_max  <=>  j <= fraction * n / 2.
  const double limit = fraction * static_cast<double>(grid.size()) / 2.0;
  return static_cast<std::size_t>(std::floor(limit + 1e-12));
}

void dealias_spectrum(Spectrum& spectrum, const Grid& grid, double fraction) {
  const std::size_t cut = dealias_cutoff_mode(grid, fraction);
  for (std::size_t j = cut + 1; j < spectrum.size(); ++j) spectrum[j] = 0.0;
}

Field dealias(const Field& f, double fraction) {
  f.require_valid("dealias");
  const std::size_t cut = dealias_cutoff_mode(f.grid(), fraction);
  if (cut + 1 >= f.grid().mode_count()) return f;
  Spectrum spec = forward_transform(f);
  dealias_spectrum(spec, f.grid(), fraction);
  return inverse_transform(f.grid(), std::move(spec));
}

double spectral_l2_norm(const Field& f) {
  const Spectrum spec = forward_transform(f);
  const std::size_t n = f.size();
  double sum = std::norm(spec.front()) + std::norm(spec.back());
  for (std::size_t j = 1; j + 1 < spec.size(); ++j) sum += 2.0 * std::norm(spec[j]);
  // Parseval for the DFT: sum |f_i|^2 = (1/n) sum |F_k|^2 over all n modes.
  return std::sqrt(sum / static_cast<double>(n) * f.grid().spacing());
}

TrigInterpolant::TrigInterpolant(const Field& f) : grid_(f.grid()) {
  f.require_valid("TrigInterpolant");
  Spectrum spec = forward_transform(f);
  const double inv_n = 1.0 / static_cast<double>(f.size());
  const std::size_t last = spec.size() - 1;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = (j == 0 || j == last) ? 1.0 : 2.0;
    spec[j] *= w * inv_n;
  }
  // The Nyquist mode contributes Re(c e^{ikx}); keep only its real part so
  // the interpolant stays real between nodes.
  spec[last] = spec[last].real();
  std::size_t keep = spec.size();
  while (keep > 1 && std::abs(spec[keep - 1]) == 0.0) --keep;
  spec.resize(keep);
  coeffs_ = std::move(spec);
}

double TrigInterpolant::operator()(double x) const {
  double out = 0.0;
  evaluate(std::span<const double>(&x, 1), std::span<double>(&out, 1));
  return out;
}

void TrigInterpolant::evaluate(std::span<const double> xs, std::span<double> out) const {
  if (xs.size() != out.size()) throw InvalidInput("TrigInterpolant::evaluate: size mismatch");
  const double k1 = grid_.wavenumber(1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::complex<double> step = std::polar(1.0, k1 * xs[i]);
    std::complex<double> rot(1.0, 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      sum += coeffs_[j].real() * rot.real() - coeffs_[j].imag() * rot.imag();
      rot *= step;
      // Recurrence drift stays far below 1e-13 for the mode counts used
      // here; renormalize every 64 modes anyway.
      if ((j & 63u) == 63u) rot /= std::abs(rot);
    }
    out[i] = sum;
  }
}

double TrigInterpolant::integral(double a, double b) const {
  double sum = coeffs_.front().real() * (b - a);
  for (std::size_t j = 1; j < coeffs_.size(); ++j) {
    const double k = grid_.wavenumber(j);
    // integral of Re(c e^{ikx}) = Re(c (e^{ikb} - e^{ika}) / (ik)).
    const std::complex<double> delta = (std::polar(1.0, k * b) - std::polar(1.0, k * a)) / std::complex<double>(0.0, k);
    sum += (coeffs_[j] * delta).real();
  }
  return sum;
}

}  // namespace popowicz
