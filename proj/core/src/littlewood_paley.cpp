#include "popowicz/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace popowicz {
namespace {

constexpr double kBallRadius = 3.0 / 4.0;
constexpr double kBallOuter = 4.0 / 3.0;

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

Field apply_window(const Grid& g, const Spectrum& spec, const DyadicCutoffs& cutoffs, int j) {
  Spectrum out(spec.size());
  for (std::size_t m = 0; m < spec.size(); ++m) out[m] = spec[m] * cutoffs.window(j, m);
  return inverse_transform(g, std::move(out));
}

double lr_combine(const std::vector<double>& weighted, double r) {
  if (std::isinf(r)) return *std::max_element(weighted.begin(), weighted.end());
  double sum = 0.0;
  for (double w : weighted) sum += std::pow(w, r);
  return std::pow(sum, 1.0 / r);
}

}  // namespace

double lp_chi(double xi) {
  const double a = std::abs(xi);
  return 1.0 - smooth_step((a - kBallRadius) / (kBallOuter - kBallRadius));
}

double lp_phi(double xi) { return lp_chi(0.5 * xi) - lp_chi(xi); }

DyadicCutoffs::DyadicCutoffs(const Grid& grid) : grid_(grid) {
  const double kmax = grid.nyquist_wavenumber();
  const double level = std::log2(kmax * 3.0 / 8.0);
  if (!(level >= 1.0)) {
    std::ostringstream msg;
    msg << "grid too coarse for a dyadic decomposition: k_max = " << kmax << " gives j_max < 1";
    throw InvalidInput(msg.str());
  }
  j_max_ = static_cast<int>(std::floor(level + 1e-12));
  const std::size_t modes = grid.mode_count();
  windows_.assign(static_cast<std::size_t>(j_max_ + 2), std::vector<double>(modes, 0.0));
  highest_covered_ = 0;
  for (std::size_t m = 0; m < modes; ++m) {
    const double k = grid.wavenumber(m);
    windows_[0][m] = lp_chi(k);
    for (int j = 0; j <= j_max_; ++j) windows_[static_cast<std::size_t>(j + 1)][m] = lp_phi(std::ldexp(k, -j));
    for (const auto& w : windows_) {
      if (w[m] > 0.0) highest_covered_ = m;
    }
  }
}

double DyadicCutoffs::window(int j, std::size_t mode) const {
  if (j < -1 || j > j_max_) return 0.0;
  return windows_[static_cast<std::size_t>(j + 1)][mode];
}

double DyadicCutoffs::exact_band() const noexcept { return kBallRadius * std::ldexp(1.0, j_max_ + 1); }

DyadicCutoffs build_cutoffs(const Grid& grid) { return DyadicCutoffs(grid); }

Field LPDecomposition::sum() const {
  Field out = Field::zeros(grid);
  for (const Field& b : blocks) out += b;
  return out;
}

LPDecomposition decompose(const Field& f, const DyadicCutoffs& cutoffs) {
  f.require_valid("decompose");
  if (!(f.grid() == cutoffs.grid())) throw InvalidInput("decompose: cutoffs built for a different grid");
  const Grid& g = f.grid();
  const Spectrum spec = forward_transform(f);
  LPDecomposition out{g, {}, 0.0};
  out.blocks.reserve(static_cast<std::size_t>(cutoffs.j_max() + 2));
  for (int j = -1; j <= cutoffs.j_max(); ++j) out.blocks.push_back(apply_window(g, spec, cutoffs, j));

  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    if (g.wavenumber(m) > cutoffs.exact_band()) {
      out.truncated_magnitude = std::max(out.truncated_magnitude, std::abs(spec[m]) * inv_n);
    }
  }
  return out;
}

Field dyadic_block(const Field& f, int j, const DyadicCutoffs& cutoffs) {
  f.require_valid("dyadic_block");
  if (!(f.grid() == cutoffs.grid())) throw InvalidInput("dyadic_block: cutoffs built for a different grid");
  return apply_window(f.grid(), forward_transform(f), cutoffs, j);
}

Field low_freq_truncate(const Field& f, int j, const DyadicCutoffs& cutoffs) {
  f.require_valid("low_freq_truncate");
  if (j < 0) throw InvalidInput("low_freq_truncate: j must be >= 0");
  if (!(f.grid() == cutoffs.grid())) throw InvalidInput("low_freq_truncate: cutoffs built for a different grid");
  Spectrum spec = forward_transform(f);
  const int top = std::min(j - 1, cutoffs.j_max());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    double w = 0.0;
    for (int jj = -1; jj <= top; ++jj) w += cutoffs.window(jj, m);
    spec[m] *= w;
  }
  return inverse_transform(f.grid(), std::move(spec));
}

void BesovParams::validate() const {
  if (!std::isfinite(s)) throw InvalidInput("Besov index s must be finite");
  if (!(p >= 1.0)) throw InvalidInput("Besov exponent p must lie in [1, inf]");
  if (!(r >= 1.0)) throw InvalidInput("Besov exponent r must lie in [1, inf]");
}

double besov_norm(const LPDecomposition& d, const BesovParams& params) {
  params.validate();
  std::vector<double> weighted;
  weighted.reserve(d.blocks.size());
  for (int j = -1; j <= d.j_max(); ++j) {
    weighted.push_back(std::exp2(j * params.s) * lp_norm(d.block(j), params.p));
  }
  return lr_combine(weighted, params.r);
}

double besov_norm(const Field& f, const BesovParams& params, const DyadicCutoffs& cutoffs) {
  return besov_norm(decompose(f, cutoffs), params);
}

Field paraproduct(const Field& u, const Field& v, const DyadicCutoffs& cutoffs) {
  require_same_grid(u, v, "paraproduct");
  const LPDecomposition du = decompose(u, cutoffs);
  const LPDecomposition dv = decompose(v, cutoffs);
  Field out = Field::zeros(u.grid());
  Field low = Field::zeros(u.grid());  // S_{j-1} u, accumulated as j grows
  for (int j = -1; j <= cutoffs.j_max(); ++j) {
    if (j - 2 >= -1) low += du.block(j - 2);
    const Field& block = dv.block(j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += low[i] * block[i];
  }
  return dealias(out, 2.0 / 3.0);
}

Field remainder(const Field& u, const Field& v, const DyadicCutoffs& cutoffs) {
  require_same_grid(u, v, "remainder");
  const LPDecomposition du = decompose(u, cutoffs);
  const LPDecomposition dv = decompose(v, cutoffs);
  Field out = Field::zeros(u.grid());
  const int jm = cutoffs.j_max();
  for (int j = -1; j <= jm; ++j) {
    for (int jp = std::max(-1, j - 1); jp <= std::min(jm, j + 1); ++jp) {
      const Field& a = du.block(jp);
      const Field& b = dv.block(j);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[i] * b[i];
    }
  }
  return dealias(out, 2.0 / 3.0);
}

std::optional<double> product_estimate_ratio(const Field& u, const Field& v, const BesovParams& params,
                                             const DyadicCutoffs& cutoffs) {
  require_same_grid(u, v, "product_estimate_ratio");
  const double nu = besov_norm(u, params.shifted(-2.0), cutoffs);
  const double nv = besov_norm(v, params.shifted(-2.0), cutoffs);
  const double denom = nu * nv;
  if (!(denom > 0.0)) return std::nullopt;
  const Field uv = dealias(u * v, 2.0 / 3.0);
  return besov_norm(uv, params.shifted(-3.0), cutoffs) / denom;
}

Field commutator(const Field& velocity, const Field& f, int j, const DyadicCutoffs& cutoffs) {
  require_same_grid(velocity, f, "commutator");
  const Field transported = velocity * derivative(dyadic_block(f, j, cutoffs));
  const Field inner = dyadic_block(velocity * derivative(f), j, cutoffs);
  return transported - inner;
}

}  // namespace popowicz
