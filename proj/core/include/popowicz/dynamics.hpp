#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "popowicz/grid.hpp"
#include "popowicz/spectral.hpp"

namespace popowicz {

inline constexpr double kDefaultDealiasFraction = 2.0 / 3.0;

/// Raised when the time integrator produces non-finite values or a safety
/// check fails. `time` is the simulation time of the last good state.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Velocity pair (u, v) at a given time.
struct State {
  Field u;
  Field v;
  double time = 0.0;

  static State zeros(const Grid& grid, double time = 0.0);
  const Grid& grid() const noexcept { return u.grid(); }
  void require_valid(std::string_view what) const;
};

/// Momentum pair m = (1 - d_xx) u, n = (1 - d_xx) v.
struct MomentumState {
  Field m;
  Field n;
  double time = 0.0;
};

MomentumState momentum(const State& state);
State velocity(const MomentumState& ms);

struct SolverConfig {
  double dt = 0.0;
  double t_end = 0.0;
  double dealias_fraction = kDefaultDealiasFraction;
  std::size_t snapshot_stride = 10;
  /// Check the momentum-form equivalence at every snapshot.
  bool safety_checks = false;

  /// Static checks: positive dt, nonnegative t_end, dt < t_end when t_end > 0,
  /// fraction in (0, 1], stride >= 1.
  void validate() const;
  /// validate() plus the advective bound dt <= 0.5 dx / max(1, max|2u+v|).
  void validate_for(const State& initial) const;
};

/// Largest step satisfying the advective bound for `state`, scaled by `safety`.
double stable_time_step(const State& state, double safety = 0.5);

/// F = p * (-3(2u_x + v_x)u + v_x u_xx - v_xx u_x).
Field rhs_F(const State& state, double dealias_fraction = kDefaultDealiasFraction);
/// H = p * (-2(2u_x + v_x)v - 2v_x u_xx - v_xx v_x).
Field rhs_H(const State& state, double dealias_fraction = kDefaultDealiasFraction);

struct Tendency {
  Field du;
  Field dv;
};

/// (u_t, v_t) = (-(2u+v)u_x + F, -(2u+v)v_x + H).
Tendency tendency(const State& state, double dealias_fraction = kDefaultDealiasFraction);
/// (m_t, n_t) from the momentum form: (-(2u+v)m_x - 3(2u_x+v_x)m, -(2u+v)n_x - 2(2u_x+v_x)n).
Tendency momentum_tendency(const State& state, double dealias_fraction = kDefaultDealiasFraction);

/// Max relative mismatch between (1 - d_xx) tendency(state) and
/// momentum_tendency(state), relative to the largest momentum tendency.
double momentum_form_mismatch(const State& state, double dealias_fraction = kDefaultDealiasFraction);

/// One classical RK4 step of size dt.
State step_rk4(const State& state, double dt, double dealias_fraction = kDefaultDealiasFraction);
State step_rk4(const State& state, const SolverConfig& config);

/// Called every snapshot_stride steps (including step 0 and the final
/// step). Throwing from the callback aborts the run.
struct Observer {
  std::string name;
  std::function<void(const State&, std::size_t step)> on_snapshot;
};

/// Advances a state by one step; lets callers co-integrate extra ODEs
/// (characteristics) with the flow. Defaults to step_rk4.
using Stepper = std::function<State(const State&, double dt)>;

struct RunSummary {
  State final_state;
  std::size_t steps = 0;
  double t_final = 0.0;
  std::optional<std::string> abort_reason;
  /// Name of the observer that failed, when one did.
  std::optional<std::string> failed_observer;
  /// Relative drift of the grid integral of m + n between start and end.
  double conserved_drift = 0.0;

  bool completed() const noexcept { return !abort_reason.has_value(); }
};

/// Integrates from initial.time to initial.time + t_end with a uniform step
/// no larger than config.dt that lands exactly on t_end.
RunSummary simulate(const State& initial, const SolverConfig& config, std::span<const Observer> observers = {},
                    const Stepper& stepper = {});

/// Grid integral of m + n.
double total_momentum(const State& state);

}  // namespace popowicz
