#include "popowicz/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace popowicz {
namespace {

Field combine(const Field& a, double wa, const Field& b, double wb) {
  Field out = Field::zeros(a.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wa * a[i] + wb * b[i];
  return out;
}

State add_scaled(const State& s, const Tendency& k, double h) {
  State out = s;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] += h * k.du[i];
    out.v[i] += h * k.dv[i];
  }
  out.time = s.time + h;
  return out;
}

State rk4_combine(const State& s, const Tendency& k1, const Tendency& k2, const Tendency& k3, const Tendency& k4,
                  double dt) {
  State out = s;
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] += w * (k1.du[i] + 2.0 * k2.du[i] + 2.0 * k3.du[i] + k4.du[i]);
    out.v[i] += w * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
  }
  out.time = s.time + dt;
  return out;
}

State linear_step(const LinearCoefficients& c0, const LinearCoefficients& ch, const LinearCoefficients& c1,
                  const State& target, double dt, double frac) {
  const Tendency k1 = linear_tendency(c0, target, frac);
  const Tendency k2 = linear_tendency(ch, add_scaled(target, k1, 0.5 * dt), frac);
  const Tendency k3 = linear_tendency(ch, add_scaled(target, k2, 0.5 * dt), frac);
  const Tendency k4 = linear_tendency(c1, add_scaled(target, k3, dt), frac);
  return rk4_combine(target, k1, k2, k3, k4, dt);
}

double state_besov(const State& s, const BesovParams& p, const DyadicCutoffs& c) {
  return besov_norm(s.u, p, c) + besov_norm(s.v, p, c);
}

}  // namespace

Trajectory::Trajectory(Grid grid, double dt) : grid_(grid), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("trajectory step must be positive");
}

Trajectory Trajectory::constant(const State& state, double dt, std::size_t steps) {
  Trajectory out(state.grid(), dt);
  const Tendency zero{Field::zeros(state.grid()), Field::zeros(state.grid())};
  for (std::size_t i = 0; i <= steps; ++i) {
    State s = state;
    s.time = static_cast<double>(i) * dt;
    out.push(std::move(s), zero);
  }
  return out;
}

void Trajectory::push(State state, Tendency rate) {
  if (!(state.grid() == grid_)) throw InvalidInput("trajectory: state on a different grid");
  states_.push_back(std::move(state));
  rates_.push_back(std::move(rate));
}

double Trajectory::horizon() const noexcept {
  return states_.empty() ? 0.0 : dt_ * static_cast<double>(states_.size() - 1);
}

State Trajectory::at(double t) const {
  if (states_.empty()) throw InvalidInput("trajectory is empty");
  if (states_.size() == 1) return states_.front();
  t = std::clamp(t, 0.0, horizon());
  const double pos = t / dt_;
  std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i >= states_.size() - 1) i = states_.size() - 2;
  const double s = pos - static_cast<double>(i);
  if (s <= 0.0) {
    State out = states_[i];
    out.time = t;
    return out;
  }
  if (s >= 1.0) {
    State out = states_[i + 1];
    out.time = t;
    return out;
  }
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = (s3 - 2.0 * s2 + s) * dt_;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = (s3 - s2) * dt_;
  const State& a = states_[i];
  const State& b = states_[i + 1];
  const Tendency& ra = rates_[i];
  const Tendency& rb = rates_[i + 1];
  State out = State::zeros(grid_, t);
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    out.u[k] = h00 * a.u[k] + h10 * ra.du[k] + h01 * b.u[k] + h11 * rb.du[k];
    out.v[k] = h00 * a.v[k] + h10 * ra.dv[k] + h01 * b.v[k] + h11 * rb.dv[k];
  }
  return out;
}

LinearCoefficients linear_coefficients(const State& coeff, double dealias_fraction) {
  coeff.require_valid("linear_coefficients");
  return LinearCoefficients{combine(coeff.u, 2.0, coeff.v, 1.0), rhs_F(coeff, dealias_fraction),
                            rhs_H(coeff, dealias_fraction)};
}

Tendency linear_tendency(const LinearCoefficients& c, const State& target, double dealias_fraction) {
  const Grid& g = target.grid();
  const Field ux = derivative(target.u);
  const Field vx = derivative(target.v);
  Field du = Field::zeros(g);
  Field dv = Field::zeros(g);
  for (std::size_t i = 0; i < du.size(); ++i) {
    du[i] = -c.transport[i] * ux[i];
    dv[i] = -c.transport[i] * vx[i];
  }
  du = dealias(du, dealias_fraction);
  dv = dealias(dv, dealias_fraction);
  du += c.source_u;
  dv += c.source_v;
  return Tendency{std::move(du), std::move(dv)};
}

State linear_transport_step(const State& coeff_state, const State& target, double dt, double dealias_fraction) {
  const LinearCoefficients c = linear_coefficients(coeff_state, dealias_fraction);
  State out = linear_step(c, c, c, target, dt, dealias_fraction);
  if (!out.u.is_finite() || !out.v.is_finite()) throw SolverAbort("non-finite linear transport step", target.time);
  return out;
}

State linear_transport_step(const std::function<State(double)>& coeff_at, const State& target, double dt,
                            double dealias_fraction) {
  const double t = target.time;
  const LinearCoefficients c0 = linear_coefficients(coeff_at(t), dealias_fraction);
  const LinearCoefficients ch = linear_coefficients(coeff_at(t + 0.5 * dt), dealias_fraction);
  const LinearCoefficients c1 = linear_coefficients(coeff_at(t + dt), dealias_fraction);
  State out = linear_step(c0, ch, c1, target, dt, dealias_fraction);
  if (!out.u.is_finite() || !out.v.is_finite()) throw SolverAbort("non-finite linear transport step", t);
  return out;
}

void IterationConfig::validate() const {
  std::ostringstream errors;
  if (max_iter == 0) errors << "picard.max_iter must be >= 1; ";
  if (!(T_frac > 0.0 && T_frac <= 1.0)) errors << "picard.T_frac must lie in (0, 1]; ";
  if (!(dt >= 0.0) || !std::isfinite(dt)) errors << "picard.dt must be nonnegative; ";
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) errors << "picard.dealias_fraction must lie in (0, 1]; ";
  if (!(fitted_C >= 0.0) || !std::isfinite(fitted_C)) errors << "picard.fitted_C must be nonnegative; ";
  if (!(max_horizon > 0.0) || !std::isfinite(max_horizon)) errors << "picard.max_horizon must be positive; ";
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) errors << "picard.horizon must be nonnegative; ";
  if (!(tolerance > 0.0)) errors << "picard.tolerance must be positive; ";
  try {
    besov.validate();
  } catch (const InvalidInput& e) {
    errors << "picard.besov: " << e.what() << "; ";
  }
  const std::string msg = errors.str();
  if (!msg.empty()) throw InvalidInput(msg.substr(0, msg.size() - 2));
}

double iteration_horizon(const IterationConfig& config, double data_norm) {
  if (config.horizon > 0.0) return config.horizon;
  const double denom = 2.0 * config.fitted_C * data_norm;
  if (!(denom > 0.0)) return config.max_horizon;
  return std::min(config.max_horizon, config.T_frac / denom);
}

IterationResult run_iteration(const Field& u0, const Field& v0, const IterationConfig& config,
                              const DyadicCutoffs& cutoffs) {
  config.validate();
  require_same_grid(u0, v0, "run_iteration");
  u0.require_valid("run_iteration u0");
  v0.require_valid("run_iteration v0");
  const Grid& g = u0.grid();
  if (!(cutoffs.grid() == g)) throw InvalidInput("run_iteration: cutoffs built for a different grid");

  const BesovParams hi = config.besov;
  const BesovParams lo = config.besov.shifted(-1.0);
  IterateTrace trace;
  trace.besov = hi;
  trace.data_norm = besov_norm(u0, hi, cutoffs) + besov_norm(v0, hi, cutoffs);
  trace.horizon = iteration_horizon(config, trace.data_norm);

  const State data{u0, v0, 0.0};
  const double dt_bound = stable_time_step(data, 0.5);
  const double dt_req = config.dt > 0.0 ? std::min(config.dt, dt_bound) : dt_bound;
  const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(trace.horizon / dt_req - 1e-9)));
  const double h = trace.horizon / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) trace.times.push_back(static_cast<double>(i) * h);

  Trajectory prev = config.start_from_data ? Trajectory::constant(data, h, steps)
                                           : Trajectory::constant(State::zeros(g), h, steps);
  std::size_t growth_run = 0;
  for (std::size_t n = 1; n <= config.max_iter; ++n) {
    const int level = static_cast<int>(n);
    State target{dealias(low_freq_truncate(u0, level, cutoffs), config.dealias_fraction),
                 dealias(low_freq_truncate(v0, level, cutoffs), config.dealias_fraction), 0.0};
    Trajectory next(g, h);
    IterateRecord rec;
    rec.n = n;

    LinearCoefficients c_now = linear_coefficients(prev.state(0), config.dealias_fraction);
    bool failed = false;
    for (std::size_t i = 0; i <= steps; ++i) {
      const State& p = prev.state(i);
      const double au = besov_norm(target.u, hi, cutoffs);
      const double av = besov_norm(target.v, hi, cutoffs);
      rec.sup_norm_u = std::max(rec.sup_norm_u, au);
      rec.sup_norm_v = std::max(rec.sup_norm_v, av);
      rec.a_series.push_back(au + av);
      rec.diff_u = std::max(rec.diff_u, besov_norm(target.u - p.u, lo, cutoffs));
      rec.diff_v = std::max(rec.diff_v, besov_norm(target.v - p.v, lo, cutoffs));

      Tendency rate = linear_tendency(c_now, target, config.dealias_fraction);
      if (i == steps) {
        next.push(target, std::move(rate));
        break;
      }
      const double t = trace.times[i];
      const LinearCoefficients c_half = linear_coefficients(prev.at(t + 0.5 * h), config.dealias_fraction);
      LinearCoefficients c_next = linear_coefficients(prev.state(i + 1), config.dealias_fraction);
      const Tendency k2 = linear_tendency(c_half, add_scaled(target, rate, 0.5 * h), config.dealias_fraction);
      const Tendency k3 = linear_tendency(c_half, add_scaled(target, k2, 0.5 * h), config.dealias_fraction);
      const Tendency k4 = linear_tendency(c_next, add_scaled(target, k3, h), config.dealias_fraction);
      State advanced = rk4_combine(target, rate, k2, k3, k4, h);
      advanced.time = trace.times[i + 1];
      next.push(std::move(target), std::move(rate));
      if (!advanced.u.is_finite() || !advanced.v.is_finite()) {
        std::ostringstream msg;
        msg << "iterate " << n << ": non-finite values after t = " << t;
        trace.abort_reason = msg.str();
        failed = true;
        break;
      }
      target = std::move(advanced);
      c_now = std::move(c_next);
    }
    if (failed) break;

    const double gap = rec.gap();
    const double last = trace.records.empty() ? std::numeric_limits<double>::infinity() : trace.records.back().gap();
    trace.records.push_back(std::move(rec));
    prev = std::move(next);
    if (gap < config.tolerance) {
      trace.converged = true;
      break;
    }
    growth_run = gap > last ? growth_run + 1 : 0;
    if (growth_run >= 3) {
      trace.diverged = true;
      break;
    }
  }
  return IterationResult{std::move(trace), std::move(prev)};
}

std::vector<double> contraction_ratios(const IterateTrace& trace, std::size_t first_n, double floor) {
  std::vector<double> out;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const IterateRecord& a = trace.records[i - 1];
    const IterateRecord& b = trace.records[i];
    if (a.n < first_n) continue;
    if (!(a.gap() > floor)) continue;
    out.push_back(b.gap() / a.gap());
  }
  return out;
}

std::size_t truncation_ramp_end(const Field& u0, const Field& v0, const BesovParams& besov,
                                const DyadicCutoffs& cutoffs, double relative) {
  const BesovParams lo = besov.shifted(-1.0);
  const double scale = besov_norm(u0, lo, cutoffs) + besov_norm(v0, lo, cutoffs);
  const int top = cutoffs.j_max() + 2;
  for (int n = 1; n < top; ++n) {
    const double err = besov_norm(u0 - low_freq_truncate(u0, n, cutoffs), lo, cutoffs) +
                       besov_norm(v0 - low_freq_truncate(v0, n, cutoffs), lo, cutoffs);
    if (err <= relative * scale) return static_cast<std::size_t>(n);
  }
  return static_cast<std::size_t>(top);
}

double uniform_bound_rhs(double data_norm, double C, double t) {
  const double denom = 1.0 - 2.0 * C * data_norm * t;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return data_norm / denom;
}

UniformBoundReport uniform_bound_check(const IterateTrace& trace, double fitted_C) {
  UniformBoundReport out;
  for (const IterateRecord& rec : trace.records) {
    bool ok = true;
    for (std::size_t i = 0; i < rec.a_series.size() && i < trace.times.size(); ++i) {
      const double rhs = uniform_bound_rhs(trace.data_norm, fitted_C, trace.times[i]);
      double ratio = 0.0;
      if (std::isinf(rhs)) {
        ratio = 0.0;
      } else if (rhs > 0.0) {
        ratio = rec.a_series[i] / rhs;
      } else {
        ratio = rec.a_series[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      }
      out.worst_ratio = std::max(out.worst_ratio, ratio);
      if (ratio > 1.0 + 1e-12) ok = false;
    }
    out.iterate_pass.push_back(ok);
    out.pass = out.pass && ok;
  }
  return out;
}

UniformBoundReport uniform_bound_check(const IterateTrace& trace, const Field& u0, const Field& v0,
                                       const DyadicCutoffs& cutoffs, double fitted_C) {
  IterateTrace copy = trace;
  copy.data_norm = besov_norm(u0, trace.besov, cutoffs) + besov_norm(v0, trace.besov, cutoffs);
  return uniform_bound_check(copy, fitted_C);
}

double fit_uniform_bound_constant(std::span<const IterateTrace> traces, double rel_tol) {
  auto all_pass = [&](double C) {
    for (const IterateTrace& t : traces) {
      if (!uniform_bound_check(t, C).pass) return false;
    }
    return true;
  };
  if (all_pass(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (!all_pass(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw InvalidInput("uniform bound constant could not be bracketed");
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (all_pass(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b, const BesovParams& params,
                           const DyadicCutoffs& cutoffs) {
  if (!(a.grid() == b.grid())) throw InvalidInput("trajectory_distance: different grids");
  const double horizon = std::min(a.horizon(), b.horizon());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const State& s = a.state(i);
    if (s.time > horizon + 1e-12) break;
    const State o = b.at(s.time);
    worst = std::max(worst, state_besov(State{s.u - o.u, s.v - o.v, s.time}, params, cutoffs));
  }
  return worst;
}

}  // namespace popowicz
