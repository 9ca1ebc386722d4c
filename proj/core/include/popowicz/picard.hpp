#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popowicz/dynamics.hpp"
#include "popowicz/littlewood_paley.hpp"

namespace popowicz {

/// Time history of one iterate on a uniform step, with the time derivative
/// stored at every node so intermediate times are recovered by cubic
/// Hermite interpolation.
class Trajectory {
 public:
  Trajectory(Grid grid, double dt);

  /// A trajectory that stays at `state` for all times in [0, horizon].
  static Trajectory constant(const State& state, double dt, std::size_t steps);

  void push(State state, Tendency rate);

  const Grid& grid() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return states_.size(); }
  double horizon() const noexcept;
  const State& state(std::size_t i) const { return states_.at(i); }
  const Tendency& rate(std::size_t i) const { return rates_.at(i); }
  /// Hermite-interpolated state at time t, clamped to [0, horizon].
  State at(double t) const;

 private:
  Grid grid_;
  double dt_;
  std::vector<State> states_;
  std::vector<Tendency> rates_;
};

/// Transport velocity and sources built from a frozen coefficient state:
/// G = 2u + v, F, H.
struct LinearCoefficients {
  Field transport;
  Field source_u;
  Field source_v;
};

LinearCoefficients linear_coefficients(const State& coeff, double dealias_fraction = kDefaultDealiasFraction);

/// Time derivative of the linear system target_t + G target_x = (F, H).
Tendency linear_tendency(const LinearCoefficients& c, const State& target,
                         double dealias_fraction = kDefaultDealiasFraction);

/// One RK4 step of the linear system with coefficients frozen at coeff_state.
State linear_transport_step(const State& coeff_state, const State& target, double dt,
                            double dealias_fraction = kDefaultDealiasFraction);
/// One RK4 step with time-dependent coefficients sampled at the stage times.
State linear_transport_step(const std::function<State(double)>& coeff_at, const State& target, double dt,
                            double dealias_fraction = kDefaultDealiasFraction);

struct IterationConfig {
  std::size_t max_iter = 30;
  /// Fraction of the guaranteed horizon 1 / (2 C A0) actually used.
  double T_frac = 0.5;
  /// Step for every linear solve; 0 picks the advective bound of the data.
  double dt = 0.0;
  double dealias_fraction = kDefaultDealiasFraction;
  /// Reporting index s; successive differences are measured at s - 1.
  BesovParams besov{2.6, 2.0, 2.0};
  /// Constant of the uniform bound; fitted once per grid.
  double fitted_C = 0.0;
  /// Cap on the horizon when fitted_C * A0 vanishes.
  double max_horizon = 1.0;
  /// Explicit horizon, overriding T_frac when positive.
  double horizon = 0.0;
  double tolerance = 1e-10;
  /// Start from (u0, v0) frozen in time instead of (0, 0).
  bool start_from_data = false;

  void validate() const;
};

/// T = T_frac / (2 C A0), capped at max_horizon; the explicit horizon when set.
double iteration_horizon(const IterationConfig& config, double data_norm);

struct IterateRecord {
  /// Iterate index n >= 1 (iterate 0 is the starting guess).
  std::size_t n = 0;
  double sup_norm_u = 0.0;
  double sup_norm_v = 0.0;
  /// sup_t ||u^n - u^{n-1}||_{B^{s-1}}, likewise for v.
  double diff_u = 0.0;
  double diff_v = 0.0;
  /// A_n(t) = ||u^n(t)||_{B^s} + ||v^n(t)||_{B^s} at every trace time.
  std::vector<double> a_series;

  double gap() const noexcept { return diff_u + diff_v; }
};

struct IterateTrace {
  std::vector<double> times;
  std::vector<IterateRecord> records;
  /// ||u0||_{B^s} + ||v0||_{B^s}.
  double data_norm = 0.0;
  double horizon = 0.0;
  BesovParams besov;
  bool converged = false;
  bool diverged = false;
  /// Set when a linear solve produced non-finite values.
  std::optional<std::string> abort_reason;

  double final_gap() const noexcept { return records.empty() ? 0.0 : records.back().gap(); }
};

struct IterationResult {
  IterateTrace trace;
  Trajectory final_iterate;
};

/// Iterates the linear transport problems from (0, 0) (or the frozen data)
/// with initial values S_n u0, S_n v0, until the successive gap drops below
/// the tolerance, the gap grows three times in a row, or max_iter is hit.
IterationResult run_iteration(const Field& u0, const Field& v0, const IterationConfig& config,
                              const DyadicCutoffs& cutoffs);

/// Ratios gap_{n+1} / gap_n for records with n >= first_n, skipping pairs
/// whose earlier gap already sits below `floor`.
std::vector<double> contraction_ratios(const IterateTrace& trace, std::size_t first_n, double floor = 0.0);

/// First iterate index whose initial truncation S_n reproduces the data to
/// `relative` in B^{s-1}; the truncation ramp ends there.
std::size_t truncation_ramp_end(const Field& u0, const Field& v0, const BesovParams& besov,
                                const DyadicCutoffs& cutoffs, double relative = 1e-6);

/// A0 / (1 - 2 C A0 t); +infinity once the denominator is no longer positive.
double uniform_bound_rhs(double data_norm, double C, double t);

struct UniformBoundReport {
  std::vector<bool> iterate_pass;
  /// Largest A_n(t) / rhs(t) over all iterates and times.
  double worst_ratio = 0.0;
  bool pass = true;
};

UniformBoundReport uniform_bound_check(const IterateTrace& trace, double fitted_C);
/// Same check with the data norm recomputed from (u0, v0).
UniformBoundReport uniform_bound_check(const IterateTrace& trace, const Field& u0, const Field& v0,
                                       const DyadicCutoffs& cutoffs, double fitted_C);

/// Smallest C (by bisection) for which every trace satisfies the uniform
/// bound at all recorded times.
double fit_uniform_bound_constant(std::span<const IterateTrace> traces, double rel_tol = 1e-6);

/// Sup over common times of ||a - b||_{B^params} for the u and v components.
double trajectory_distance(const Trajectory& a, const Trajectory& b, const BesovParams& params,
                           const DyadicCutoffs& cutoffs);

}  // namespace popowicz
