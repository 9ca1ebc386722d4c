#include "popowicz/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "popowicz/field_io.hpp"
#include "popowicz/parallel.hpp"

namespace popowicz {
namespace {

struct VelocitySamples {
  std::vector<double> g;
  std::vector<double> gx;
};

VelocitySamples sample_velocity(const State& s, std::span<const double> q) {
  const Field G = 2.0 * s.u + s.v;
  const Field Gx = derivative(G);
  VelocitySamples out{std::vector<double>(q.size()), std::vector<double>(q.size())};
  TrigInterpolant(G).evaluate(q, out.g);
  TrigInterpolant(Gx).evaluate(q, out.gx);
  return out;
}

struct MapRate {
  std::vector<double> dq;
  std::vector<double> dj;
};

MapRate map_rate(const State& s, const std::vector<double>& q, const std::vector<double>& jac) {
  VelocitySamples vs = sample_velocity(s, q);
  MapRate out{std::move(vs.g), std::move(vs.gx)};
  for (std::size_t i = 0; i < jac.size(); ++i) out.dj[i] *= jac[i];
  return out;
}

std::vector<double> shifted(const std::vector<double>& base, const std::vector<double>& rate, double h) {
  std::vector<double> out(base);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * rate[i];
  return out;
}

void rk4_update(std::vector<double>& y, const std::vector<double>& k1, const std::vector<double>& k2,
                const std::vector<double>& k3, const std::vector<double>& k4, double dt) {
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

std::string fmt(double x);

State stage_state(const State& s, const Tendency& k, double h) {
  State out = s;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] += h * k.du[i];
    out.v[i] += h * k.dv[i];
  }
  out.time = s.time + h;
  if (!out.u.is_finite() || !out.v.is_finite()) {
    throw SolverAbort("non-finite values after step from t = " + fmt(s.time), s.time);
  }
  return out;
}

// Largest prefix of the record with uniform snapshot spacing.
std::size_t uniform_prefix(const std::vector<double>& times, double& spacing) {
  if (times.size() < 2) {
    spacing = 0.0;
    return times.size();
  }
  spacing = times[1] - times[0];
  std::size_t n = 2;
  while (n < times.size() && std::abs((times[n] - times[n - 1]) - spacing) <= 1e-9 * spacing) ++n;
  return n;
}

double rate_mismatch(std::span<const double> series, std::span<const double> rate, double spacing,
                     std::size_t& samples) {
  const std::vector<double> d = five_point_derivative(series, spacing);
  samples = d.size();
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    diff = std::max(diff, std::abs(d[i] - rate[i + 2]));
    scale = std::max(scale, std::abs(rate[i + 2]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

double interp_at(const Field& f, double x) { return TrigInterpolant(f)(x); }

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j{{"name", v.name}, {"pass", v.pass}, {"worst_value", v.worst_value}, {"tolerance", v.tolerance}};
  if (!std::isfinite(v.worst_value)) j["worst_value"] = fmt(v.worst_value);
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

nlohmann::json verdicts_to_json(std::span<const Verdict> verdicts) {
  nlohmann::json out = nlohmann::json::array();
  for (const Verdict& v : verdicts) out.push_back(verdict_to_json(v));
  return out;
}

bool all_pass(std::span<const Verdict> verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

CharacteristicMap CharacteristicMap::identity(const Grid& grid, double time) {
  CharacteristicMap out;
  out.labels = grid.nodes();
  out.position = out.labels;
  out.jacobian.assign(grid.size(), 1.0);
  out.time = time;
  return out;
}

void CharacteristicMap::require_diffeomorphism() const {
  for (std::size_t i = 0; i < jacobian.size(); ++i) {
    if (!(jacobian[i] > 0.0)) {
      std::ostringstream msg;
      msg << "characteristics lost monotonicity at label x = " << labels[i] << " (q_x = " << jacobian[i] << ")";
      throw SolverAbort(msg.str(), time);
    }
    if (i > 0 && !(position[i] > position[i - 1])) {
      std::ostringstream msg;
      msg << "characteristics crossed near label x = " << labels[i];
      throw SolverAbort(msg.str(), time);
    }
  }
}

CharacteristicMap advance_characteristics(const CharacteristicMap& map, const State& state, double dt) {
  state.require_valid("advance_characteristics");
  const MapRate k1 = map_rate(state, map.position, map.jacobian);
  const MapRate k2 = map_rate(state, shifted(map.position, k1.dq, 0.5 * dt), shifted(map.jacobian, k1.dj, 0.5 * dt));
  const MapRate k3 = map_rate(state, shifted(map.position, k2.dq, 0.5 * dt), shifted(map.jacobian, k2.dj, 0.5 * dt));
  const MapRate k4 = map_rate(state, shifted(map.position, k3.dq, dt), shifted(map.jacobian, k3.dj, dt));
  CharacteristicMap out = map;
  rk4_update(out.position, k1.dq, k2.dq, k3.dq, k4.dq, dt);
  rk4_update(out.jacobian, k1.dj, k2.dj, k3.dj, k4.dj, dt);
  out.time = map.time + dt;
  out.require_diffeomorphism();
  return out;
}

FlowState advance_with_characteristics(const FlowState& flow, double dt, double dealias_fraction) {
  const State& s = flow.state;
  const CharacteristicMap& m = flow.map;
  s.require_valid("advance_with_characteristics");

  const Tendency k1 = tendency(s, dealias_fraction);
  const MapRate r1 = map_rate(s, m.position, m.jacobian);
  const State s2 = stage_state(s, k1, 0.5 * dt);
  const Tendency k2 = tendency(s2, dealias_fraction);
  const MapRate r2 = map_rate(s2, shifted(m.position, r1.dq, 0.5 * dt), shifted(m.jacobian, r1.dj, 0.5 * dt));
  const State s3 = stage_state(s, k2, 0.5 * dt);
  const Tendency k3 = tendency(s3, dealias_fraction);
  const MapRate r3 = map_rate(s3, shifted(m.position, r2.dq, 0.5 * dt), shifted(m.jacobian, r2.dj, 0.5 * dt));
  const State s4 = stage_state(s, k3, dt);
  const Tendency k4 = tendency(s4, dealias_fraction);
  const MapRate r4 = map_rate(s4, shifted(m.position, r3.dq, dt), shifted(m.jacobian, r3.dj, dt));

  FlowState out = flow;
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.state.u.size(); ++i) {
    out.state.u[i] += w * (k1.du[i] + 2.0 * k2.du[i] + 2.0 * k3.du[i] + k4.du[i]);
    out.state.v[i] += w * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
  }
  out.state.time = s.time + dt;
  if (!out.state.u.is_finite() || !out.state.v.is_finite()) {
    throw SolverAbort("non-finite values after step from t = " + fmt(s.time), s.time);
  }
  rk4_update(out.map.position, r1.dq, r2.dq, r3.dq, r4.dq, dt);
  rk4_update(out.map.jacobian, r1.dj, r2.dj, r3.dj, r4.dj, dt);
  out.map.time = m.time + dt;
  out.map.require_diffeomorphism();
  return out;
}

DiagnosticsRecorder::DiagnosticsRecorder(const Grid& grid, RecorderOptions options)
    : grid_(grid), options_(std::move(options)) {
  if (options_.besov) {
    options_.besov->validate();
    cutoffs_.emplace(grid_);
  }
}

Observer DiagnosticsRecorder::observer(std::string name) {
  return Observer{std::move(name), [this](const State& s, std::size_t) { record(s); }};
}

void DiagnosticsRecorder::record(const State& state) {
  if (!(state.grid() == grid_)) throw InvalidInput("diagnostics recorder: state on a different grid");
  const MomentumState ms = momentum(state);
  const Field sum = ms.m + ms.n;
  const Field ux = derivative(state.u);
  const Field vx = derivative(state.v);
  const Field G = 2.0 * state.u + state.v;
  const Field Gx = 2.0 * ux + vx;
  const double c = options_.half_line_center;
  const double half = 0.5 * grid_.period();

  DiagnosticsRecord& d = data_;
  d.times.push_back(state.time);
  d.total_momentum.push_back(grid_integral(sum));
  d.half_line_momentum.push_back(TrigInterpolant(sum).integral(c, c + half));
  const double integrand = ux.max_abs() + vx.max_abs() + state.u.max_abs() + state.v.max_abs();
  if (d.blowup_integral.empty()) {
    d.blowup_integral.push_back(0.0);
  } else {
    const double dt = state.time - d.times[d.times.size() - 2];
    d.blowup_integral.push_back(d.blowup_integral.back() + 0.5 * dt * (integrand + d.blowup_integrand.back()));
  }
  d.blowup_integrand.push_back(integrand);
  d.l1_m.push_back(lp_norm(ms.m, 1.0));
  d.l1_n.push_back(lp_norm(ms.n, 1.0));
  d.l1_mn.push_back(lp_norm(sum, 1.0));
  d.min_m.push_back(ms.m.min());
  d.min_n.push_back(ms.n.min());
  d.max_m.push_back(ms.m.max());
  d.max_n.push_back(ms.n.max());
  d.int_m.push_back(grid_integral(ms.m));
  d.int_m_rate.push_back(-2.0 * grid_integral(Gx * ms.m));
  d.int_m_rate_alt.push_back(-4.0 * grid_integral((ux + vx) * ms.m));

  const Field flux = Gx * (2.0 * ms.m + ms.n);
  const Field boundary = G * sum;
  const TrigInterpolant bi(boundary);
  d.half_line_rate.push_back(-TrigInterpolant(flux).integral(c, c + half) - (bi(c + half) - bi(c)));

  if (options_.besov) {
    d.besov_sum.push_back(besov_norm(state.u, *options_.besov, *cutoffs_) +
                          besov_norm(state.v, *options_.besov, *cutoffs_));
  }
  if (options_.keep_states) {
    d.states.push_back(state);
    d.momenta.push_back(ms);
  }
}

void write_diagnostics_csv(const std::filesystem::path& path, const DiagnosticsRecord& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "t,total_momentum,half_line_momentum,blowup_integrand,blowup_integral,l1_m,l1_n,min_m,min_n\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << format_number(r.times[i]) << ',' << format_number(r.total_momentum[i]) << ','
        << format_number(r.half_line_momentum[i]) << ',' << format_number(r.blowup_integrand[i]) << ','
        << format_number(r.blowup_integral[i]) << ',' << format_number(r.l1_m[i]) << ','
        << format_number(r.l1_n[i]) << ',' << format_number(r.min_m[i]) << ',' << format_number(r.min_n[i])
        << '\n';
  }
}

Verdict conservation_check(const DiagnosticsRecord& r, double tolerance) {
  Verdict v{"conservation", true, 0.0, tolerance, {}};
  if (r.size() == 0) return v;
  const double m0 = r.total_momentum.front();
  const double mass = r.l1_m.front() + r.l1_n.front();
  double scale = std::abs(m0);
  if (scale <= 1e-8 * mass) scale = mass;
  for (double x : r.total_momentum) {
    const double drift = std::abs(x - m0);
    v.worst_value = std::max(v.worst_value, scale > 0.0 ? drift / scale : drift);
  }
  v.pass = v.worst_value <= tolerance;
  return v;
}

std::vector<double> five_point_derivative(std::span<const double> values, double spacing) {
  std::vector<double> out;
  if (values.size() < 5) return out;
  for (std::size_t i = 2; i + 2 < values.size(); ++i) {
    out.push_back((-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) / (12.0 * spacing));
  }
  return out;
}

RateIdentityReport momentum_rate_identity(const DiagnosticsRecord& r) {
  RateIdentityReport out;
  double spacing = 0.0;
  const std::size_t n = uniform_prefix(r.times, spacing);
  if (n < 5) return out;
  out.mismatch = rate_mismatch(std::span(r.int_m).first(n), r.int_m_rate, spacing, out.samples);
  out.alt_mismatch = rate_mismatch(std::span(r.int_m).first(n), r.int_m_rate_alt, spacing, out.samples);
  return out;
}

Verdict momentum_rate_check(const DiagnosticsRecord& r, double tolerance) {
  const RateIdentityReport rep = momentum_rate_identity(r);
  Verdict v{"momentum_rate_identity", rep.mismatch <= tolerance, rep.mismatch, tolerance, {}};
  if (rep.samples == 0) {
    v.pass = false;
    v.detail = "fewer than five uniformly spaced snapshots";
    return v;
  }
  v.detail = "d/dt int m vs -2 int (2u_x+v_x) m; the form -4 int (u_x+v_x) m mismatches by " + fmt(rep.alt_mismatch);
  return v;
}

SignReport sign_report(const DiagnosticsRecord& r) {
  SignReport out;
  if (r.size() == 0) return out;
  auto classify = [](double lo, double hi) {
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (scale == 0.0) return 0;
    if (lo >= -1e-9 * scale) return 1;
    if (hi <= 1e-9 * scale) return -1;
    return 0;
  };
  auto violation = [&](int sign, const std::vector<double>& lo, const std::vector<double>& hi) {
    const double scale = std::max(std::abs(lo.front()), std::abs(hi.front()));
    double worst = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (sign > 0) worst = std::max(worst, -lo[i]);
      if (sign < 0) worst = std::max(worst, hi[i]);
    }
    return scale > 0.0 ? worst / scale : 0.0;
  };
  out.sign_m = classify(r.min_m.front(), r.max_m.front());
  out.sign_n = classify(r.min_n.front(), r.max_n.front());
  out.violation_m = violation(out.sign_m, r.min_m, r.max_m);
  out.violation_n = violation(out.sign_n, r.min_n, r.max_n);
  out.both_signs_persist_m = r.min_m.back() < 0.0 && r.max_m.back() > 0.0;
  out.both_signs_persist_n = r.min_n.back() < 0.0 && r.max_n.back() > 0.0;
  return out;
}

Verdict sign_preservation_check(const DiagnosticsRecord& r, double relative_tolerance) {
  const SignReport rep = sign_report(r);
  Verdict v{"sign_preservation", true, std::max(rep.violation_m, rep.violation_n), relative_tolerance, {}};
  v.pass = v.worst_value <= relative_tolerance;
  std::ostringstream detail;
  detail << "sign(m0) = " << rep.sign_m << ", sign(n0) = " << rep.sign_n;
  if (rep.sign_m == 0 && r.size() > 0 && r.min_m.front() < 0.0) {
    detail << "; m keeps both signs: " << (rep.both_signs_persist_m ? "yes" : "no");
  }
  if (rep.sign_n == 0 && r.size() > 0 && r.min_n.front() < 0.0) {
    detail << "; n keeps both signs: " << (rep.both_signs_persist_n ? "yes" : "no");
  }
  v.detail = detail.str();
  return v;
}

Verdict l1_bound_check(const DiagnosticsRecord& r, L1Rates rates) {
  Verdict v{"l1_bound", true, 0.0, 1.0, {}};
  if (r.size() == 0) return v;
  const double c0 = 0.5 * r.l1_mn.front();
  const double m0 = r.l1_m.front();
  const double n0 = r.l1_n.front();
  auto ratio = [](double value, double bound) {
    if (bound > 0.0) return value / bound;
    return value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = r.times[i] - r.times.front();
    v.worst_value = std::max(v.worst_value, ratio(r.l1_m[i], m0 * std::exp(rates.m_rate * c0 * t)));
    v.worst_value = std::max(v.worst_value, ratio(r.l1_n[i], n0 * std::exp(rates.n_rate * c0 * t)));
  }
  v.pass = v.worst_value <= 1.0 + 1e-12;
  v.detail = "largest ||.||_1 / bound over m and n";
  return v;
}

Verdict blowup_integrand_bound_check(const DiagnosticsRecord& r) {
  Verdict v{"blowup_integrand_bound", true, 0.0, 1.0, {}};
  if (r.size() == 0) return v;
  const double c0 = 0.5 * r.l1_mn.front();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = r.times[i] - r.times.front();
    const double bound =
        2.0 * r.l1_n.front() * std::exp(2.0 * c0 * t) + 2.0 * r.l1_m.front() * std::exp(4.0 * c0 * t);
    const double ratio = bound > 0.0 ? r.blowup_integrand[i] / bound
                                     : (r.blowup_integrand[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    v.worst_value = std::max(v.worst_value, ratio);
  }
  v.pass = v.worst_value <= 1.0 + 1e-12;
  return v;
}

double fit_growth_constant(std::span<const DiagnosticsRecord* const> records) {
  double c = 0.0;
  for (const DiagnosticsRecord* r : records) {
    if (r->besov_sum.size() != r->size()) throw InvalidInput("growth fit needs Besov norms in every record");
    if (r->size() == 0 || !(r->besov_sum.front() > 0.0)) continue;
    for (std::size_t i = 1; i < r->size(); ++i) {
      const double integral = r->blowup_integral[i];
      if (!(integral > 0.0)) continue;
      c = std::max(c, std::log(r->besov_sum[i] / r->besov_sum.front()) / integral);
    }
  }
  return c;
}

Verdict growth_bound_check(const DiagnosticsRecord& r, double fitted_C) {
  Verdict v{"besov_growth_bound", true, 0.0, 1.0, {}};
  if (r.besov_sum.size() != r.size()) throw InvalidInput("growth check needs Besov norms in the record");
  if (r.size() == 0) return v;
  const double b0 = r.besov_sum.front();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double bound = b0 * std::exp(fitted_C * r.blowup_integral[i]);
    const double ratio =
        bound > 0.0 ? r.besov_sum[i] / bound : (r.besov_sum[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    v.worst_value = std::max(v.worst_value, ratio);
  }
  v.pass = v.worst_value <= 1.0 + 1e-9;
  v.detail = "fitted C = " + fmt(fitted_C);
  return v;
}

PushforwardReport pushforward_invariants(std::span<const CharacteristicMap> maps,
                                         std::span<const MomentumState> momenta, PushforwardExponents exponents) {
  if (maps.size() != momenta.size()) throw InvalidInput("pushforward: maps and momenta differ in length");
  PushforwardReport out;
  if (maps.empty()) return out;
  const MomentumState& first = momenta.front();
  const Grid& g = first.m.grid();
  const TrigInterpolant m0i(first.m);
  const TrigInterpolant n0i(first.n);
  std::vector<double> m0(maps.front().labels.size());
  std::vector<double> n0(m0.size());
  m0i.evaluate(maps.front().labels, m0);
  n0i.evaluate(maps.front().labels, n0);
  const double scale_m = first.m.max_abs();
  const double scale_n = first.n.max_abs();
  std::vector<double> mq(m0.size());
  std::vector<double> nq(m0.size());
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const CharacteristicMap& map = maps[k];
    if (std::abs(map.time - momenta[k].time) > 1e-9 * std::max(1.0, std::abs(map.time))) {
      throw InvalidInput("pushforward: map and momentum snapshot times differ");
    }
    if (!(momenta[k].m.grid() == g)) throw InvalidInput("pushforward: momentum on a different grid");
    TrigInterpolant(momenta[k].m).evaluate(map.position, mq);
    TrigInterpolant(momenta[k].n).evaluate(map.position, nq);
    for (std::size_t i = 0; i < mq.size(); ++i) {
      const double dm = std::abs(mq[i] * std::pow(map.jacobian[i], exponents.m) - m0[i]);
      const double dn = std::abs(nq[i] * std::pow(map.jacobian[i], exponents.n) - n0[i]);
      out.deviation_m = std::max(out.deviation_m, scale_m > 0.0 ? dm / scale_m : dm);
      out.deviation_n = std::max(out.deviation_n, scale_n > 0.0 ? dn / scale_n : dn);
    }
  }
  return out;
}

Verdict pushforward_check(std::span<const CharacteristicMap> maps, std::span<const MomentumState> momenta,
                          PushforwardExponents exponents, double tolerance) {
  const PushforwardReport rep = pushforward_invariants(maps, momenta, exponents);
  Verdict v{"pushforward", true, std::max(rep.deviation_m, rep.deviation_n), tolerance, {}};
  v.pass = v.worst_value <= tolerance;
  v.detail = "m q_x^" + fmt(exponents.m) + " deviation " + fmt(rep.deviation_m) + ", n q_x^" + fmt(exponents.n) +
             " deviation " + fmt(rep.deviation_n);
  return v;
}

double oddness_defect(const Field& f, double center) {
  const Grid& g = f.grid();
  const double twice = 2.0 * center / g.spacing();
  const double rounded = std::round(twice);
  if (std::abs(twice - rounded) > 1e-9) throw InvalidInput("oddness center must sit on a node or a half node");
  const long n = static_cast<long>(g.size());
  const long s2 = static_cast<long>(rounded);
  double worst = 0.0;
  for (long i = 0; i < n; ++i) {
    const long j = ((s2 - i) % n + n) % n;
    worst = std::max(worst, std::abs(f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(j)]));
  }
  return worst;
}

void require_odd_data(const MomentumState& m0, double center) {
  const double scale = std::max(m0.m.max_abs(), m0.n.max_abs());
  const double defect = std::max(oddness_defect(m0.m, center), oddness_defect(m0.n, center));
  if (defect > 1e-10 * scale) {
    throw InvalidInput("initial momentum is not odd about x = " + fmt(center) + " (defect " + fmt(defect) + ")");
  }
}

std::vector<Verdict> odd_symmetry_check(const DiagnosticsRecord& r, const OddSymmetryOptions& o) {
  if (r.momenta.size() != r.size() || r.states.size() != r.size()) {
    throw InvalidInput("odd symmetry check needs the stored snapshots");
  }
  std::vector<Verdict> out;
  if (r.size() == 0) return out;
  const MomentumState& first = r.momenta.front();
  require_odd_data(first, o.center);
  const Grid& g = first.m.grid();
  const double L = g.period();
  const double scale_m = first.m.max_abs();
  const double scale_n = first.n.max_abs();
  auto rel = [](double x, double scale) { return scale > 0.0 ? x / scale : x; };

  Verdict odd{"oddness", true, 0.0, o.oddness_tolerance, {}};
  Verdict sign{"odd_sign_pattern", true, 0.0, o.sign_tolerance, {}};
  Verdict center{"center_velocity", true, 0.0, o.center_tolerance, {}};
  for (std::size_t k = 0; k < r.size(); ++k) {
    const MomentumState& ms = r.momenta[k];
    odd.worst_value = std::max({odd.worst_value, rel(oddness_defect(ms.m, o.center), scale_m),
                                rel(oddness_defect(ms.n, o.center), scale_n)});
    for (std::size_t i = 0; i < g.size(); ++i) {
      double d = std::fmod(g.node(i) - o.center, L);
      if (d < 0.0) d += L;
      double side = 0.0;
      if (d > 0.0 && d < 0.5 * L) side = 1.0;
      if (d > 0.5 * L) side = -1.0;
      sign.worst_value = std::max({sign.worst_value, rel(std::max(0.0, -side * ms.m[i]), scale_m),
                                   rel(std::max(0.0, -side * ms.n[i]), scale_n)});
    }
    const State& s = r.states[k];
    center.worst_value =
        std::max({center.worst_value, std::abs(interp_at(s.u, o.center)), std::abs(interp_at(s.v, o.center))});
  }
  odd.pass = odd.worst_value <= odd.tolerance;
  sign.pass = sign.worst_value <= sign.tolerance;
  center.pass = center.worst_value <= center.tolerance;
  center.detail = "max |u(t, c)|, |v(t, c)|";

  Verdict half{"half_line_conservation", true, 0.0, o.half_line_tolerance, {}};
  const double h0 = r.half_line_momentum.front();
  for (double h : r.half_line_momentum) half.worst_value = std::max(half.worst_value, rel(std::abs(h - h0), std::abs(h0)));
  half.pass = half.worst_value <= half.tolerance;
  half.detail = "relative change of the integral of m + n over [c, c + L/2]";

  Verdict rate{"half_line_rate_identity", false, 0.0, o.rate_tolerance, {}};
  double spacing = 0.0;
  const std::size_t n = uniform_prefix(r.times, spacing);
  if (n >= 5) {
    std::size_t samples = 0;
    rate.worst_value = rate_mismatch(std::span(r.half_line_momentum).first(n), r.half_line_rate, spacing, samples);
    rate.pass = rate.worst_value <= rate.tolerance;
    rate.detail = "d/dt of the half-line integral vs -int (2u_x+v_x)(2m+n) over the half line";
  } else {
    rate.detail = "fewer than five uniformly spaced snapshots";
  }
  out = {odd, sign, half, center, rate};
  return out;
}

double crest_position(const Field& f) {
  const Grid& g = f.grid();
  const auto vals = f.values();
  const std::size_t n = vals.size();
  const std::size_t i = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  const double a = vals[(i + n - 1) % n];
  const double b = vals[i];
  const double c = vals[(i + 1) % n];
  const double curv = a - 2.0 * b + c;
  double offset = curv < 0.0 ? 0.5 * (a - c) / curv : 0.0;
  offset = std::clamp(offset, -0.5, 0.5);
  double x = (static_cast<double>(i) + offset) * g.spacing();
  if (x < 0.0) x += g.period();
  return std::fmod(x, g.period());
}

TravelReport traveling_wave_report(std::span<const double> times, std::span<const Field> profiles) {
  if (times.size() != profiles.size() || profiles.size() < 2) {
    throw InvalidInput("traveling_wave_report needs at least two profiles with matching times");
  }
  const double L = profiles.front().grid().period();
  std::vector<double> pos{crest_position(profiles.front())};
  for (std::size_t k = 1; k < profiles.size(); ++k) {
    const double raw = crest_position(profiles[k]);
    double step = std::remainder(raw - std::fmod(pos.back(), L), L);
    pos.push_back(pos.back() + step);
  }
  const double n = static_cast<double>(pos.size());
  double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    st += times[k];
    sx += pos[k];
    stt += times[k] * times[k];
    stx += times[k] * pos[k];
  }
  TravelReport out;
  const double denom = n * stt - st * st;
  if (denom > 0.0) out.speed = (n * stx - st * sx) / denom;

  const Field& first = profiles.front();
  const Field& last = profiles.back();
  const double shift = pos.back() - pos.front();
  std::vector<double> xs = first.grid().nodes();
  for (double& x : xs) x -= shift;
  std::vector<double> moved(xs.size());
  TrigInterpolant(first).evaluate(xs, moved);
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    diff += (last[i] - moved[i]) * (last[i] - moved[i]);
    norm += first[i] * first[i];
  }
  out.shape_deviation = norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
  return out;
}

DependenceReport continuous_dependence_experiment(const State& base, const State& perturbation,
                                                  std::span<const double> scales, const DependenceOptions& options,
                                                  const DyadicCutoffs& cutoffs) {
  base.require_valid("continuous dependence base");
  perturbation.require_valid("continuous dependence perturbation");
  require_same_grid(base.u, perturbation.u, "continuous dependence");
  const BesovParams lo = options.besov.shifted(-1.0);
  const std::size_t runs = scales.size() + 1;
  std::vector<std::vector<State>> paths(runs);
  std::vector<std::optional<std::string>> aborts(runs);

  parallel_for(runs, options.workers, [&](std::size_t i) {
    State init = base;
    if (i > 0) {
      const double eps = scales[i - 1];
      init.u += eps * perturbation.u;
      init.v += eps * perturbation.v;
    }
    std::vector<State>& path = paths[i];
    const Observer keep{"path", [&path](const State& s, std::size_t) { path.push_back(s); }};
    try {
      const RunSummary summary = simulate(init, options.solver, std::span(&keep, 1));
      aborts[i] = summary.abort_reason;
    } catch (const std::exception& e) {
      aborts[i] = e.what();
    }
  });

  DependenceReport report;
  const double delta = besov_norm(perturbation.u, lo, cutoffs) + besov_norm(perturbation.v, lo, cutoffs);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 1; i < runs; ++i) {
    DependenceMember member{scales[i - 1], 0.0, aborts[i]};
    if (aborts[0]) member.abort_reason = "base run: " + *aborts[0];
    if (!member.abort_reason) {
      const std::size_t n = std::min(paths[0].size(), paths[i].size());
      for (std::size_t k = 0; k < n; ++k) {
        const State& a = paths[0][k];
        const State& b = paths[i][k];
        member.distance = std::max(member.distance, besov_norm(b.u - a.u, lo, cutoffs) + besov_norm(b.v - a.v, lo, cutoffs));
      }
      if (member.scale > 0.0 && member.distance > 0.0 && std::isfinite(member.distance)) {
        xs.push_back(std::log(member.scale));
        ys.push_back(std::log(member.distance));
      }
      if (member.scale > 0.0 && delta > 0.0) {
        report.amplification = std::max(report.amplification, member.distance / (member.scale * delta));
      }
    } else {
      report.partial = true;
    }
    report.members.push_back(std::move(member));
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom > 0.0) report.slope = (n * sxy - sx * sy) / denom;
  }
  return report;
}

}  // namespace popowicz
