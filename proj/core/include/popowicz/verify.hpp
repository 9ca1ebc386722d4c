#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "popowicz/diagnostics.hpp"
#include "popowicz/scenario.hpp"

namespace popowicz {

/// core, lp, picard, lagrangian, all.
const std::vector<std::string>& suite_names();

/// Names accepted as mutation overrides:
/// pushforward_m_exponent, pushforward_n_exponent, l1_m_rate, l1_n_rate.
const std::vector<std::string>& known_mutations();

struct VerifyOptions {
  /// Each scenario writes its run directory below this path, plus report.json.
  std::optional<std::filesystem::path> out_dir;
  std::size_t workers = 1;
  /// Overrides applied to every scenario config before it runs.
  std::map<std::string, double> mutations;
  std::uint64_t seed = 20240611;
};

struct SuiteReport {
  std::string suite;
  std::vector<Verdict> verdicts;
  double wall_seconds = 0.0;

  bool pass() const { return all_pass(verdicts); }
};

/// Runs a suite. Throws InvalidInput for an unknown suite or mutation name.
SuiteReport verify_suite(const std::string& name, const VerifyOptions& options = {});

/// {suite, pass, wall_seconds, checks: [...]}
nlohmann::json report_to_json(const SuiteReport& report);

/// Partition of unity, reconstruction, Bony identity and almost
/// orthogonality on seeded band-limited fields.
std::vector<Verdict> lp_identity_checks(std::uint64_t seed);

struct ProductEstimateSweep {
  double max_ratio_coarse = 0.0;
  double max_ratio_fine = 0.0;
  /// max(fine, coarse) / min(fine, coarse)
  double change = 0.0;
};

/// Max of ||uv||_{s-3} / (||u||_{s-2} ||v||_{s-2}) over `pairs` seeded
/// random band-limited pairs on N = 256 and N = 1024 (s, p, r) = (2.6, 2, 2).
ProductEstimateSweep product_estimate_sweep(std::uint64_t seed, std::size_t pairs = 100);
Verdict product_estimate_check(std::uint64_t seed, std::size_t pairs = 100);

/// Convergence, contraction beyond the truncation ramp, distance to the
/// nonlinear solver and the uniform bound.
std::vector<Verdict> picard_verdicts(const PicardRun& run);

/// Spectral derivative, Helmholtz pair, kernel convolution and the velocity
/// and momentum forms of the equations on a smooth state.
std::vector<Verdict> spectral_checks();

}  // namespace popowicz
