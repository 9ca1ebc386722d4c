#include "popowicz/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace popowicz {
namespace {

// Spectral derivatives of both velocity components, shared by every
// right-hand side evaluation.
struct Derivatives {
  Field ux, uxx, vx, vxx;
};

Field apply_symbol(const Grid& g, const Spectrum& spec, auto&& symbol) {
  Spectrum out(spec.size());
  for (std::size_t j = 0; j < spec.size(); ++j) out[j] = spec[j] * symbol(j);
  return inverse_transform(g, std::move(out));
}

Derivatives derivatives_of(const State& s) {
  const Grid& g = s.grid();
  const std::size_t nyq = g.mode_count() - 1;
  const Spectrum U = forward_transform(s.u);
  const Spectrum V = forward_transform(s.v);
  auto d1 = [&](std::size_t j) {
    return j == nyq ? std::complex<double>(0.0) : std::complex<double>(0.0, g.wavenumber(j));
  };
  auto d2 = [&](std::size_t j) {
    const double k = g.wavenumber(j);
    return std::complex<double>(-k * k, 0.0);
  };
  return Derivatives{apply_symbol(g, U, d1), apply_symbol(g, U, d2), apply_symbol(g, V, d1), apply_symbol(g, V, d2)};
}

// mask * (sum_i weight_i(k) * FFT(term_i)), transformed back.
Field project(const Grid& g, double fraction, std::initializer_list<std::pair<const Field*, bool>> terms) {
  const std::size_t cut = dealias_cutoff_mode(g, fraction);
  Spectrum acc(g.mode_count(), 0.0);
  for (const auto& [field, convolve] : terms) {
    const Spectrum s = forward_transform(*field);
    for (std::size_t j = 0; j <= cut && j < acc.size(); ++j) {
      const double k = g.wavenumber(j);
      acc[j] += convolve ? s[j] / (1.0 + k * k) : s[j];
    }
  }
  return inverse_transform(g, std::move(acc));
}

Field f_integrand(const State& s, const Derivatives& d) {
  Field out = Field::zeros(s.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gx = 2.0 * d.ux[i] + d.vx[i];
    out[i] = -3.0 * gx * s.u[i] + d.vx[i] * d.uxx[i] - d.vxx[i] * d.ux[i];
  }
  return out;
}

Field h_integrand(const State& s, const Derivatives& d) {
  Field out = Field::zeros(s.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double gx = 2.0 * d.ux[i] + d.vx[i];
    out[i] = -2.0 * gx * s.v[i] - 2.0 * d.vx[i] * d.uxx[i] - d.vxx[i] * d.vx[i];
  }
  return out;
}

void require_finite_state(const State& s, double last_good_time) {
  if (!s.u.is_finite() || !s.v.is_finite()) {
    std::ostringstream msg;
    msg << "non-finite values after step from t = " << last_good_time;
    throw SolverAbort(msg.str(), last_good_time);
  }
}

}  // namespace

State State::zeros(const Grid& grid, double time) { return State{Field::zeros(grid), Field::zeros(grid), time}; }

void State::require_valid(std::string_view what) const {
  require_same_grid(u, v, what);
  u.require_valid(what);
  v.require_valid(what);
}

MomentumState momentum(const State& state) {
  state.require_valid("momentum");
  return MomentumState{helmholtz_forward(state.u), helmholtz_forward(state.v), state.time};
}

State velocity(const MomentumState& ms) {
  require_same_grid(ms.m, ms.n, "velocity");
  const HelmholtzKernel kernel(ms.m.grid());
  return State{helmholtz_inverse(ms.m, kernel), helmholtz_inverse(ms.n, kernel), ms.time};
}

void SolverConfig::validate() const {
  std::ostringstream errors;
  if (!(dt > 0.0) || !std::isfinite(dt)) errors << "solver.dt must be positive; ";
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) errors << "solver.t_end must be nonnegative; ";
  if (t_end > 0.0 && dt >= t_end) errors << "solver.dt (" << dt << ") must be smaller than solver.t_end (" << t_end << "); ";
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) errors << "solver.dealias_fraction must lie in (0, 1]; ";
  if (snapshot_stride == 0) errors << "solver.snapshot_stride must be >= 1; ";
  const std::string msg = errors.str();
  if (!msg.empty()) throw InvalidInput(msg.substr(0, msg.size() - 2));
}

void SolverConfig::validate_for(const State& initial) const {
  validate();
  initial.require_valid("initial state");
  const double bound = stable_time_step(initial, 0.5);
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "solver.dt = " << dt << " violates the advective bound " << bound;
    throw InvalidInput(msg.str());
  }
}

double stable_time_step(const State& state, double safety) {
  double gmax = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) gmax = std::max(gmax, std::abs(2.0 * state.u[i] + state.v[i]));
  return safety * state.grid().spacing() / std::max(1.0, gmax);
}

Field rhs_F(const State& state, double dealias_fraction) {
  state.require_valid("rhs_F");
  const Derivatives d = derivatives_of(state);
  const Field integrand = f_integrand(state, d);
  return project(state.grid(), dealias_fraction, {{&integrand, true}});
}

Field rhs_H(const State& state, double dealias_fraction) {
  state.require_valid("rhs_H");
  const Derivatives d = derivatives_of(state);
  const Field integrand = h_integrand(state, d);
  return project(state.grid(), dealias_fraction, {{&integrand, true}});
}

Tendency tendency(const State& state, double dealias_fraction) {
  state.require_valid("tendency");
  const Grid& g = state.grid();
  const Derivatives d = derivatives_of(state);
  Field adv_u = Field::zeros(g);
  Field adv_v = Field::zeros(g);
  for (std::size_t i = 0; i < adv_u.size(); ++i) {
    const double G = 2.0 * state.u[i] + state.v[i];
    adv_u[i] = -G * d.ux[i];
    adv_v[i] = -G * d.vx[i];
  }
  const Field fi = f_integrand(state, d);
  const Field hi = h_integrand(state, d);
  return Tendency{project(g, dealias_fraction, {{&adv_u, false}, {&fi, true}}),
                  project(g, dealias_fraction, {{&adv_v, false}, {&hi, true}})};
}

Tendency momentum_tendency(const State& state, double dealias_fraction) {
  state.require_valid("momentum_tendency");
  const Grid& g = state.grid();
  const MomentumState ms = momentum(state);
  const Field mx = derivative(ms.m);
  const Field nx = derivative(ms.n);
  const Field ux = derivative(state.u);
  const Field vx = derivative(state.v);
  Field dm = Field::zeros(g);
  Field dn = Field::zeros(g);
  for (std::size_t i = 0; i < dm.size(); ++i) {
    const double G = 2.0 * state.u[i] + state.v[i];
    const double Gx = 2.0 * ux[i] + vx[i];
    dm[i] = -G * mx[i] - 3.0 * Gx * ms.m[i];
    dn[i] = -G * nx[i] - 2.0 * Gx * ms.n[i];
  }
  return Tendency{project(g, dealias_fraction, {{&dm, false}}), project(g, dealias_fraction, {{&dn, false}})};
}

double momentum_form_mismatch(const State& state, double dealias_fraction) {
  const Tendency vel = tendency(state, dealias_fraction);
  const Tendency mom = momentum_tendency(state, dealias_fraction);
  const double diff = std::max(max_abs_difference(helmholtz_forward(vel.du), mom.du),
                               max_abs_difference(helmholtz_forward(vel.dv), mom.dv));
  const double scale = std::max(mom.du.max_abs(), mom.dv.max_abs());
  if (scale == 0.0) return diff;
  return diff / scale;
}

State step_rk4(const State& s, double dt, double dealias_fraction) {
  s.require_valid("step_rk4");
  auto stage = [&](const Tendency& k, double h) {
    State out = s;
    for (std::size_t i = 0; i < out.u.size(); ++i) {
      out.u[i] += h * k.du[i];
      out.v[i] += h * k.dv[i];
    }
    out.time = s.time + h;
    require_finite_state(out, s.time);
    return out;
  };
  const Tendency k1 = tendency(s, dealias_fraction);
  const Tendency k2 = tendency(stage(k1, 0.5 * dt), dealias_fraction);
  const Tendency k3 = tendency(stage(k2, 0.5 * dt), dealias_fraction);
  const Tendency k4 = tendency(stage(k3, dt), dealias_fraction);
  State out = s;
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] += w * (k1.du[i] + 2.0 * k2.du[i] + 2.0 * k3.du[i] + k4.du[i]);
    out.v[i] += w * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
  }
  out.time = s.time + dt;
  require_finite_state(out, s.time);
  return out;
}

State step_rk4(const State& state, const SolverConfig& config) {
  return step_rk4(state, config.dt, config.dealias_fraction);
}

double total_momentum(const State& state) {
  // m + n has the same mean as u + v, since 1 - d_xx leaves mode 0 alone.
  return grid_integral(state.u) + grid_integral(state.v);
}

RunSummary simulate(const State& initial, const SolverConfig& config, std::span<const Observer> observers,
                    const Stepper& stepper) {
  config.validate_for(initial);
  const std::size_t steps =
      config.t_end > 0.0 ? static_cast<std::size_t>(std::ceil(config.t_end / config.dt - 1e-9)) : 0;
  const double h = steps > 0 ? config.t_end / static_cast<double>(steps) : 0.0;

  RunSummary summary{initial, 0, initial.time, std::nullopt, std::nullopt, 0.0};
  const double m0 = total_momentum(initial);
  double scale = std::abs(m0);
  if (scale == 0.0) {
    const MomentumState ms = momentum(initial);
    scale = lp_norm(ms.m, 1.0) + lp_norm(ms.n, 1.0);
  }

  auto notify = [&](const State& s, std::size_t step) {
    for (const Observer& obs : observers) {
      try {
        obs.on_snapshot(s, step);
      } catch (const std::exception& e) {
        summary.failed_observer = obs.name;
        summary.abort_reason = "observer '" + obs.name + "' failed: " + e.what();
        return false;
      }
    }
    return true;
  };

  State state = initial;
  if (!notify(state, 0)) return summary;
  for (std::size_t step = 1; step <= steps; ++step) {
    try {
      state = stepper ? stepper(state, h) : step_rk4(state, h, config.dealias_fraction);
    } catch (const SolverAbort& e) {
      summary.abort_reason = e.what();
      break;
    }
    state.time = initial.time + static_cast<double>(step) * h;
    summary.final_state = state;
    summary.steps = step;
    summary.t_final = state.time;
    if (step % config.snapshot_stride == 0 || step == steps) {
      if (config.safety_checks) {
        const double mismatch = momentum_form_mismatch(state, config.dealias_fraction);
        if (!(mismatch <= 1e-8)) {
          std::ostringstream msg;
          msg << "momentum-form safety check failed at t = " << state.time << " (mismatch " << mismatch << ")";
          summary.abort_reason = msg.str();
          break;
        }
      }
      if (!notify(state, step)) break;
    }
  }
  const double drift = std::abs(total_momentum(summary.final_state) - m0);
  summary.conserved_drift = scale > 0.0 ? drift / scale : drift;
  return summary;
}

}  // namespace popowicz
