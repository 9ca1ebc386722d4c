#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "popowicz/diagnostics.hpp"
#include "popowicz/dynamics.hpp"
#include "popowicz/littlewood_paley.hpp"
#include "popowicz/picard.hpp"

namespace popowicz {

/// Collects every validation error found in a config.
class ConfigError : public InvalidInput {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

enum class ProfileKind { zero, gaussian_momentum, peakon, odd_bump, fourier_modes };
enum class DataSpace { velocity, momentum };

struct FourierMode {
  /// Cycles per box.
  int k = 0;
  double amp = 0.0;
  double phase = 0.0;
};

/// One channel of initial data. Unused fields keep their defaults.
struct ProfileSpec {
  ProfileKind kind = ProfileKind::zero;
  double amplitude = 0.0;
  double width = 1.0;
  double center = 0.0;
  double sign = 1.0;
  double c = 0.0;
  int mollify_passes = 0;
  std::vector<FourierMode> modes;
};

struct InitialData {
  DataSpace space = DataSpace::velocity;
  /// u (or m) and v (or n) channels.
  ProfileSpec first;
  ProfileSpec second;
};

struct PeakonCheckSpec {
  /// "u" or "v".
  std::string channel = "v";
  double expected_speed = 1.0;
  double speed_tolerance = 0.01;
  double shape_tolerance = 0.03;
};

struct DependenceSpec {
  std::vector<double> scales;
  InitialData perturbation;
  double t_end = 0.0;
};

struct PicardSpec {
  IterationConfig iteration;
  /// Refit the uniform-bound constant from a seeded ensemble instead of
  /// using iteration.fitted_C.
  bool calibrate = false;
  std::size_t calibration_runs = 20;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  Grid grid{8, 1.0};
  SolverConfig solver;
  InitialData initial;
  std::vector<std::string> checks;
  BesovParams besov{2.6, 2.0, 2.0};
  std::uint64_t seed = 0;
  std::optional<PeakonCheckSpec> peakon;
  /// Frozen constant of the Besov growth bound.
  std::optional<double> growth_constant;
  PushforwardExponents pushforward_exponents;
  L1Rates l1_rates;
  std::optional<DependenceSpec> dependence;
  std::optional<PicardSpec> picard;
  /// The JSON the config was parsed from.
  nlohmann::json source;
};

/// Check names accepted in the "diagnostics" list.
const std::vector<std::string>& known_checks();

/// Strict parse: unknown keys and every inconsistency are collected and
/// thrown together as ConfigError. grid, solver.dt and solver.t_end have no
/// defaults.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Samples one channel on the grid (velocity or momentum, as specified).
Field sample_profile(const ProfileSpec& spec, const Grid& grid);
/// Builds the velocity state: momentum specs go through velocity(); the
/// result is dealiased at the solver's fraction.
State build_initial_state(const InitialData& data, const Grid& grid, double dealias_fraction);

struct BuiltinScenario {
  std::string name;
  std::string description;
  nlohmann::json config;
};

const std::vector<BuiltinScenario>& builtin_scenarios();
std::optional<nlohmann::json> builtin_config(const std::string& name);

struct ScenarioResult {
  explicit ScenarioResult(RunSummary s) : summary(std::move(s)) {}

  RunSummary summary;
  DiagnosticsRecord record;
  std::vector<Verdict> verdicts;
  std::optional<DependenceReport> dependence;
  /// Characteristics at each snapshot when the pushforward check is enabled.
  std::vector<CharacteristicMap> maps;
  double wall_seconds = 0.0;

  bool passed() const { return summary.completed() && all_pass(verdicts); }
};

struct RunOptions {
  /// Run directory; nothing is written when empty.
  std::optional<std::filesystem::path> out_dir;
  bool plots = false;
  std::size_t workers = 1;
};

/// Runs the solver with the enabled diagnostics and evaluates every check.
/// A solver abort still yields the partial record and an artifact.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Writes the run directory: config.json, snapshots.csv, diagnostics.csv,
/// verdicts.json, summary.json.
void write_run_artifact(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result);

nlohmann::json summary_to_json(const RunSummary& summary);

/// Seeded smooth random data on `grid`: sums of periodic bumps with
/// amplitudes in [amp_lo, amp_hi].
State random_smooth_state(const Grid& grid, std::uint64_t seed, double amp_lo, double amp_hi);

/// Fits the Besov growth constant on `runs` members that share the grid,
/// solver and Besov index of `base` but draw nonnegative Gaussian momenta
/// (amplitude 0.05..0.2, width 1.5..3.5, center in the middle 60% of the box).
double calibrate_growth_constant(const ScenarioConfig& base, std::uint64_t seed, std::size_t runs,
                                 std::size_t workers);

struct PicardRun {
  IterationResult result;
  double fitted_C = 0.0;
  double nonlinear_distance = 0.0;
  std::vector<double> ratios;
  std::size_t ramp_end = 0;
  UniformBoundReport bound;
};

/// Fits the uniform-bound constant over `runs` seeded random members.
double calibrate_picard_constant(const Grid& grid, const IterationConfig& base, std::uint64_t seed, std::size_t runs,
                                 std::size_t workers);
/// Runs the iteration for the scenario, compares the final iterate with the
/// nonlinear solver, and checks the uniform bound.
PicardRun run_picard(const ScenarioConfig& config, std::size_t workers);

/// Writes trace.csv and summary.json for a Picard run.
void write_picard_artifact(const std::filesystem::path& dir, const ScenarioConfig& config, const PicardRun& run);

}  // namespace popowicz
