#include <doctest.h>

#include <cmath>
#include <vector>

#include "popowicz/diagnostics.hpp"
#include "support.hpp"

using namespace popowicz;
using testing::kPi;
using testing::max_diff;

namespace {

Field periodic_gaussian(const Grid& g, double a, double w, double c) {
  const double L = g.period();
  return Field::sample(g, [=](double x) {
    double s = 0.0;
    for (int k = -3; k <= 3; ++k) {
      const double y = x - c + k * L;
      s += a * std::exp(-y * y / (w * w));
    }
    return s;
  });
}

State positive_momentum_state(std::size_t n = 256) {
  const Grid g(n, 40.0);
  return velocity(MomentumState{periodic_gaussian(g, 0.15, 2.0, 15.0), periodic_gaussian(g, 0.09, 3.0, 25.0), 0.0});
}

DiagnosticsRecord record_run(const State& s0, double dt, double t_end, RecorderOptions opts = {}) {
  DiagnosticsRecorder rec(s0.grid(), opts);
  SolverConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.snapshot_stride = 1;
  const std::vector<Observer> obs{rec.observer()};
  const RunSummary r = simulate(s0, c, obs);
  REQUIRE(r.completed());
  return rec.data();
}

}  // namespace

TEST_CASE("five-point derivative is exact on quartics") {
  std::vector<double> t, y;
  for (int i = 0; i < 12; ++i) {
    const double x = 0.3 * i;
    t.push_back(x);
    y.push_back(1.0 - 2.0 * x + 0.5 * x * x * x * x);
  }
  const std::vector<double> d = five_point_derivative(y, 0.3);
  REQUIRE(d.size() == 8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = t[i + 2];
    CHECK(d[i] == doctest::Approx(-2.0 + 2.0 * x * x * x).epsilon(1e-12));
  }
  CHECK(five_point_derivative(std::vector<double>{1, 2, 3, 4}, 1.0).empty());
}

TEST_CASE("characteristics") {
  const Grid g(64, 2.0 * kPi);
  const CharacteristicMap id = CharacteristicMap::identity(g);
  CHECK(id.position[5] == doctest::Approx(g.node(5)));
  CHECK(id.jacobian[5] == 1.0);

  SUBCASE("zero velocity does not move") {
    const CharacteristicMap m = advance_characteristics(id, State::zeros(g), 0.1);
    CHECK(m.position == id.position);
    CHECK(m.jacobian == id.jacobian);
  }
  SUBCASE("constant velocity translates") {
    const State s{Field::constant(g, 0.25), Field::constant(g, 0.5), 0.0};
    CharacteristicMap m = id;
    for (int i = 0; i < 10; ++i) m = advance_characteristics(m, s, 0.1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(m.position[i] == doctest::Approx(id.position[i] + 1.0).epsilon(1e-13));
      CHECK(m.jacobian[i] == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  SUBCASE("frozen flow: q_x = G(q) / G(x)") {
    const State s{Field::sample(g, [](double x) { return 1.0 + 0.3 * std::sin(x); }), Field::zeros(g), 0.0};
    CharacteristicMap m = id;
    for (int i = 0; i < 200; ++i) m = advance_characteristics(m, s, 0.005);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.node(i);
      const double expected = (2.0 + 0.6 * std::sin(m.position[i])) / (2.0 + 0.6 * std::sin(x));
      worst = std::max(worst, std::abs(m.jacobian[i] - expected));
    }
    CHECK(worst <= 1e-8);
    CHECK_NOTHROW(m.require_diffeomorphism());
  }
  SUBCASE("folding is detected") {
    CharacteristicMap m = id;
    m.jacobian[3] = -0.1;
    CHECK_THROWS_AS(m.require_diffeomorphism(), SolverAbort);
    CharacteristicMap n = id;
    std::swap(n.position[3], n.position[4]);
    CHECK_THROWS_AS(n.require_diffeomorphism(), SolverAbort);
  }
}

TEST_CASE("recorder on the zero state") {
  const Grid g(32, 5.0);
  DiagnosticsRecorder rec(g, {});
  rec.record(State::zeros(g));
  const DiagnosticsRecord& d = rec.data();
  REQUIRE(d.size() == 1);
  CHECK(d.total_momentum[0] == 0.0);
  CHECK(d.blowup_integral[0] == 0.0);
  CHECK(conservation_check(d).pass);
  CHECK(l1_bound_check(d).pass);
  const SignReport s = sign_report(d);
  CHECK(s.sign_m == 0);
  CHECK(s.sign_n == 0);
}

TEST_CASE("diagnostics along a positive-momentum run") {
  RecorderOptions opts;
  opts.besov = BesovParams{2.6, 2.0, 2.0};
  const DiagnosticsRecord d = record_run(positive_momentum_state(), 0.05, 3.0, opts);
  REQUIRE(d.size() == 61);

  CHECK(conservation_check(d).pass);
  const Verdict sign = sign_preservation_check(d);
  CHECK(sign.pass);
  const SignReport sr = sign_report(d);
  CHECK(sr.sign_m == 1);
  CHECK(sr.sign_n == 1);
  CHECK(l1_bound_check(d).pass);
  CHECK(blowup_integrand_bound_check(d).pass);

  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d.blowup_integral[i] >= d.blowup_integral[i - 1]);

  const RateIdentityReport rate = momentum_rate_identity(d);
  CHECK(rate.samples == 57);
  CHECK(rate.mismatch <= 1e-6);
  CHECK(rate.alt_mismatch > 1e-2);

  const DiagnosticsRecord* one[] = {&d};
  const double C = fit_growth_constant(one);
  CHECK(C >= 0.0);
  CHECK(growth_bound_check(d, C * 1.001 + 1e-12).pass);
  if (C > 0.0) CHECK_FALSE(growth_bound_check(d, 0.9 * C).pass);
}

TEST_CASE("conservation scale falls back to the L1 mass") {
  DiagnosticsRecord r;
  r.times = {0.0, 1.0};
  r.total_momentum = {0.0, 1e-9};
  r.l1_m = {1.0, 1.0};
  r.l1_n = {1.0, 1.0};
  const Verdict v = conservation_check(r);
  CHECK(v.worst_value == doctest::Approx(5e-10));
  CHECK(v.pass);
  r.total_momentum = {2.0, 2.1};
  CHECK_FALSE(conservation_check(r).pass);
}

TEST_CASE("pushforward invariants") {
  const Grid g(64, 2.0 * kPi);
  const MomentumState ms{periodic_gaussian(g, 1.0, 1.0, 3.0), periodic_gaussian(g, 0.5, 1.0, 2.0), 0.0};
  const std::vector<CharacteristicMap> maps{CharacteristicMap::identity(g), CharacteristicMap::identity(g, 1.0)};
  MomentumState later = ms;
  later.time = 1.0;
  const std::vector<MomentumState> momenta{ms, later};
  const PushforwardReport rep = pushforward_invariants(maps, momenta);
  CHECK(rep.deviation_m <= 1e-14);
  CHECK(rep.deviation_n <= 1e-14);
  CHECK(pushforward_check(maps, momenta).pass);

  SUBCASE("flow by the equations conserves the weighted momenta") {
    const State s0 = positive_momentum_state(512);
    FlowState flow{s0, CharacteristicMap::identity(s0.grid())};
    std::vector<CharacteristicMap> ms_maps{flow.map};
    std::vector<MomentumState> ms_mom{momentum(s0)};
    for (int i = 0; i < 40; ++i) {
      flow = advance_with_characteristics(flow, 0.025);
      if (i % 10 == 9) {
        ms_maps.push_back(flow.map);
        ms_mom.push_back(momentum(flow.state));
      }
    }
    const PushforwardReport r = pushforward_invariants(ms_maps, ms_mom);
    CHECK(r.deviation_m <= 1e-6);
    CHECK(r.deviation_n <= 1e-6);
    const PushforwardReport wrong = pushforward_invariants(ms_maps, ms_mom, PushforwardExponents{2.0, 2.0});
    CHECK(wrong.deviation_m > 1e-4);
  }
}

TEST_CASE("odd symmetry") {
  const Grid g(64, 2.0 * kPi);
  const Field s = Field::sample(g, [](double x) { return std::sin(x); });
  const Field c = Field::sample(g, [](double x) { return std::cos(x); });
  CHECK(oddness_defect(s, 0.0) <= 1e-15);
  CHECK(oddness_defect(s, kPi) <= 1e-14);
  CHECK(oddness_defect(c, 0.0) == doctest::Approx(2.0));
  CHECK_NOTHROW(require_odd_data(MomentumState{s, 0.5 * s, 0.0}, kPi));
  CHECK_THROWS_AS(require_odd_data(MomentumState{s, c, 0.0}, kPi), InvalidInput);
}

TEST_CASE("traveling wave report") {
  const Grid g(256, 20.0);
  const double speed = 0.8;
  std::vector<double> times;
  std::vector<Field> profiles;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.5 * i;
    times.push_back(t);
    profiles.push_back(periodic_gaussian(g, 1.0, 1.0, 4.0 + speed * t));
  }
  const TravelReport r = traveling_wave_report(times, profiles);
  CHECK(r.speed == doctest::Approx(speed).epsilon(1e-3));
  CHECK(r.shape_deviation <= 1e-3);
  CHECK(crest_position(profiles[0]) == doctest::Approx(4.0).epsilon(1e-3));
  CHECK_THROWS_AS(traveling_wave_report(std::span(times).first(1), std::span(profiles).first(1)), InvalidInput);
}

TEST_CASE("continuous dependence with a zero perturbation") {
  const Grid g(64, 2.0 * kPi);
  const DyadicCutoffs cutoffs(g);
  const State base{Field::sample(g, [](double x) { return 0.1 * std::cos(x); }), Field::zeros(g), 0.0};
  DependenceOptions opts;
  opts.solver.dt = 0.02;
  opts.solver.t_end = 0.2;
  const std::vector<double> scales{0.0, 1e-3};
  const State pert{Field::sample(g, [](double x) { return std::sin(2 * x); }), Field::zeros(g), 0.0};
  const DependenceReport r = continuous_dependence_experiment(base, pert, scales, opts, cutoffs);
  REQUIRE(r.members.size() == 2);
  CHECK(r.members[0].distance == 0.0);
  CHECK(r.members[1].distance > 0.0);
  CHECK_FALSE(r.slope.has_value());
}

TEST_CASE("verdict serialization") {
  const Verdict v{"x", false, 2.0, 1.0, "detail"};
  const nlohmann::json j = verdict_to_json(v);
  CHECK(j.at("name") == "x");
  CHECK(j.at("pass") == false);
  const std::vector<Verdict> vs{v, Verdict{"y", true, 0.0, 1.0, ""}};
  CHECK_FALSE(all_pass(vs));
  CHECK(verdicts_to_json(vs).size() == 2);
}
