#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "popowicz/dynamics.hpp"
#include "popowicz/littlewood_paley.hpp"

namespace popowicz {

/// Outcome of one named check.
struct Verdict {
  std::string name;
  bool pass = false;
  double worst_value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

nlohmann::json verdict_to_json(const Verdict& v);
nlohmann::json verdicts_to_json(std::span<const Verdict> verdicts);
bool all_pass(std::span<const Verdict> verdicts);

/// Flow map of the transport velocity 2u + v, labelled by the grid nodes.
struct CharacteristicMap {
  std::vector<double> labels;
  std::vector<double> position;
  std::vector<double> jacobian;
  double time = 0.0;

  /// q(0, x) = x, q_x = 1 on the nodes of `grid`.
  static CharacteristicMap identity(const Grid& grid, double time = 0.0);
  /// Throws SolverAbort when some q_x <= 0 or q is not strictly increasing.
  void require_diffeomorphism() const;
};

/// One RK4 step of q_t = G(q), (q_x)_t = G_x(q) q_x with G = 2u + v frozen at `state`.
CharacteristicMap advance_characteristics(const CharacteristicMap& map, const State& state, double dt);

/// Eulerian state and characteristics advanced together.
struct FlowState {
  State state;
  CharacteristicMap map;
};

/// Joint RK4 step: every stage samples the stage velocity at the stage positions.
FlowState advance_with_characteristics(const FlowState& flow, double dt,
                                       double dealias_fraction = kDefaultDealiasFraction);

struct RecorderOptions {
  /// Left end of the half line [center, center + L/2].
  double half_line_center = 0.0;
  /// Reporting norm for the growth bound; skipped when empty.
  std::optional<BesovParams> besov;
  bool keep_states = true;
};

/// Time series gathered at every snapshot of a run.
struct DiagnosticsRecord {
  std::vector<double> times;
  std::vector<double> total_momentum;
  std::vector<double> half_line_momentum;
  std::vector<double> blowup_integrand;
  std::vector<double> blowup_integral;
  std::vector<double> l1_m, l1_n;
  /// ||m + n||_1
  std::vector<double> l1_mn;
  std::vector<double> min_m, min_n, max_m, max_n;
  /// Grid integral of m alone and the two candidate expressions for its rate.
  std::vector<double> int_m;
  /// -2 int (2u_x + v_x) m
  std::vector<double> int_m_rate;
  /// -4 int (u_x + v_x) m
  std::vector<double> int_m_rate_alt;
  /// - int_{half line} (2u_x + v_x)(2m + n)
  std::vector<double> half_line_rate;
  /// ||u||_B + ||v||_B in the reporting norm, when enabled.
  std::vector<double> besov_sum;
  std::vector<MomentumState> momenta;
  std::vector<State> states;

  std::size_t size() const noexcept { return times.size(); }
};

/// Collects a DiagnosticsRecord through the simulate observer interface.
class DiagnosticsRecorder {
 public:
  DiagnosticsRecorder(const Grid& grid, RecorderOptions options);
  DiagnosticsRecorder(const DiagnosticsRecorder&) = delete;
  DiagnosticsRecorder& operator=(const DiagnosticsRecorder&) = delete;

  /// The observer refers to this recorder, which must outlive the run.
  Observer observer(std::string name = "diagnostics");
  void record(const State& state);
  const DiagnosticsRecord& data() const noexcept { return data_; }

 private:
  Grid grid_;
  RecorderOptions options_;
  std::optional<DyadicCutoffs> cutoffs_;
  DiagnosticsRecord data_;
};

void write_diagnostics_csv(const std::filesystem::path& path, const DiagnosticsRecord& record);

/// Relative drift of int (m + n); the scale is |int (m0 + n0)|, or the L1 mass
/// ||m0||_1 + ||n0||_1 when the integral is below 1e-8 of it.
Verdict conservation_check(const DiagnosticsRecord& record, double tolerance = 1e-8);

struct RateIdentityReport {
  /// Max |d/dt int m - rate| / max |rate| over interior snapshots.
  double mismatch = 0.0;
  /// Same with the alternative rate expression.
  double alt_mismatch = 0.0;
  std::size_t samples = 0;
};

/// Five-point derivative of a uniformly sampled series at interior samples.
std::vector<double> five_point_derivative(std::span<const double> values, double spacing);
RateIdentityReport momentum_rate_identity(const DiagnosticsRecord& record);
Verdict momentum_rate_check(const DiagnosticsRecord& record, double tolerance = 1e-6);

struct SignReport {
  /// +1 nonnegative, -1 nonpositive, 0 sign-changing or zero, per channel.
  int sign_m = 0;
  int sign_n = 0;
  /// Largest violation of the initial sign divided by the channel's max |.|_0.
  double violation_m = 0.0;
  double violation_n = 0.0;
  /// Sign-changing data: whether both signs are still present at the end.
  bool both_signs_persist_m = false;
  bool both_signs_persist_n = false;
};

SignReport sign_report(const DiagnosticsRecord& record);
Verdict sign_preservation_check(const DiagnosticsRecord& record, double relative_tolerance = 1e-6);

struct L1Rates {
  double m_rate = 4.0;
  double n_rate = 2.0;
};

/// max_t ||m(t)||_1 / (||m0||_1 e^{m_rate C0 t}) and the n analogue, C0 = ||m0 + n0||_1 / 2.
Verdict l1_bound_check(const DiagnosticsRecord& record, L1Rates rates = {});
/// Integrand <= 2 ||n0||_1 e^{2 C0 t} + 2 ||m0||_1 e^{4 C0 t}.
Verdict blowup_integrand_bound_check(const DiagnosticsRecord& record);

/// Smallest C with B(t) <= B(0) exp(C * blowup_integral(t)) over the records.
double fit_growth_constant(std::span<const DiagnosticsRecord* const> records);
Verdict growth_bound_check(const DiagnosticsRecord& record, double fitted_C);

struct PushforwardExponents {
  double m = 3.0;
  double n = 2.0;
};

struct PushforwardReport {
  /// max |m(t, q) q_x^a - m0| / max |m0|, likewise for n.
  double deviation_m = 0.0;
  double deviation_n = 0.0;
};

PushforwardReport pushforward_invariants(std::span<const CharacteristicMap> maps,
                                         std::span<const MomentumState> momenta,
                                         PushforwardExponents exponents = {});
Verdict pushforward_check(std::span<const CharacteristicMap> maps, std::span<const MomentumState> momenta,
                          PushforwardExponents exponents = {}, double tolerance = 1e-6);

struct OddSymmetryOptions {
  double center = 0.0;
  double oddness_tolerance = 1e-8;
  double sign_tolerance = 1e-6;
  double half_line_tolerance = 1e-7;
  double center_tolerance = 1e-8;
  double rate_tolerance = 1e-6;
};

/// Max |f(c + y) + f(c - y)| over the nodes; c must sit on a node or half a
/// cell between nodes.
double oddness_defect(const Field& f, double center);
/// Throws InvalidInput unless m0 and n0 are odd about `center` to 1e-10 relative.
void require_odd_data(const MomentumState& m0, double center);

/// Oddness, the sign pattern (m, n <= 0 left of the center, >= 0 right of it),
/// half-line conservation, u(center) = 0, and the half-line rate identity.
std::vector<Verdict> odd_symmetry_check(const DiagnosticsRecord& record, const OddSymmetryOptions& options);

/// Grid maximum refined by a parabola through its neighbours, in [0, L).
double crest_position(const Field& f);

struct TravelReport {
  /// Least-squares slope of the unwrapped crest position against time.
  double speed = 0.0;
  /// ||f(T) - f(0)(. - shift)||_2 / ||f(0)||_2 with shift the crest displacement.
  double shape_deviation = 0.0;
};

/// Needs at least two profiles; consecutive crest moves must stay below L/2.
TravelReport traveling_wave_report(std::span<const double> times, std::span<const Field> profiles);

struct DependenceMember {
  double scale = 0.0;
  double distance = 0.0;
  std::optional<std::string> abort_reason;
};

struct DependenceReport {
  std::vector<DependenceMember> members;
  /// Least-squares slope of log D against log eps over finite, nonzero members.
  std::optional<double> slope;
  /// max D(eps) / (eps ||(du, dv)||) over members.
  double amplification = 0.0;
  bool partial = false;
};

struct DependenceOptions {
  SolverConfig solver;
  BesovParams besov{2.6, 2.0, 2.0};
  std::size_t workers = 1;
};

/// Runs the base data and each perturbed member, D(eps) = sup over snapshots
/// of ||u^eps - u||_{B^{s-1}} + ||v^eps - v||_{B^{s-1}}.
DependenceReport continuous_dependence_experiment(const State& base, const State& perturbation,
                                                  std::span<const double> scales, const DependenceOptions& options,
                                                  const DyadicCutoffs& cutoffs);

}  // namespace popowicz
