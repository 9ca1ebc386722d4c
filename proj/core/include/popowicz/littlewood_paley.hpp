#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "popowicz/grid.hpp"
#include "popowicz/spectral.hpp"

namespace popowicz {

/// Smooth radial cutoff: 1 on |xi| <= 3/4, 0 on |xi| >= 4/3, monotone in
/// between through the exp(-1/t) glue.
double lp_chi(double xi);
/// phi(xi) = chi(xi/2) - chi(xi); supported in 3/4 <= |xi| <= 8/3.
double lp_phi(double xi);

/// chi and the dilated annuli phi(2^-j .) tabulated on the modes of a grid.
class DyadicCutoffs {
 public:
  explicit DyadicCutoffs(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  /// Largest block index, floor(log2(3 k_max / 8)).
  int j_max() const noexcept { return j_max_; }
  /// Window of block j (j = -1 is the ball) at a given mode index.
  double window(int j, std::size_t mode) const;
  /// Highest mode covered by some block; content above it is not
  /// represented by the decomposition.
  std::size_t highest_covered_mode() const noexcept { return highest_covered_; }
  /// Modes with |k| <= (3/4) 2^{j_max} are reconstructed exactly.
  double exact_band() const noexcept;

 private:
  Grid grid_;
  int j_max_;
  std::size_t highest_covered_;
  // windows_[j + 1][mode]
  std::vector<std::vector<double>> windows_;
};

/// Builds the cutoff table. Throws InvalidInput if the grid cannot host j_max >= 1.
DyadicCutoffs build_cutoffs(const Grid& grid);

struct LPDecomposition {
  Grid grid;
  /// blocks[j + 1] = Delta_j f, j = -1..j_max.
  std::vector<Field> blocks;
  /// Max spectral magnitude (normalized) of content above the covered band.
  double truncated_magnitude = 0.0;

  int j_max() const noexcept { return static_cast<int>(blocks.size()) - 2; }
  const Field& block(int j) const { return blocks.at(static_cast<std::size_t>(j + 1)); }
  Field sum() const;
};

LPDecomposition decompose(const Field& f, const DyadicCutoffs& cutoffs);
/// Delta_j f for a single block index.
Field dyadic_block(const Field& f, int j, const DyadicCutoffs& cutoffs);
/// S_j f = sum_{j' <= j-1} Delta_{j'} f, for j >= 0.
Field low_freq_truncate(const Field& f, int j, const DyadicCutoffs& cutoffs);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;

  void validate() const;
  BesovParams shifted(double ds) const { return BesovParams{s + ds, p, r}; }
};

/// || (2^{js} ||Delta_j f||_{L^p})_j ||_{l^r} over j = -1..j_max.
double besov_norm(const Field& f, const BesovParams& params, const DyadicCutoffs& cutoffs);
/// Same norm from a precomputed decomposition.
double besov_norm(const LPDecomposition& d, const BesovParams& params);

/// T_u v = sum_j S_{j-1}u Delta_j v, dealiased at 2/3.
Field paraproduct(const Field& u, const Field& v, const DyadicCutoffs& cutoffs);
/// R(u, v) = sum_{|j - j'| <= 1} Delta_{j'}u Delta_j v, dealiased at 2/3.
Field remainder(const Field& u, const Field& v, const DyadicCutoffs& cutoffs);

/// ||uv||_{B^{s-3}} / (||u||_{B^{s-2}} ||v||_{B^{s-2}}); nullopt when the
/// denominator vanishes.
std::optional<double> product_estimate_ratio(const Field& u, const Field& v, const BesovParams& params,
                                             const DyadicCutoffs& cutoffs);

/// velocity * d_x(Delta_j f) - Delta_j(velocity * d_x f).
Field commutator(const Field& velocity, const Field& f, int j, const DyadicCutoffs& cutoffs);

}  // namespace popowicz
