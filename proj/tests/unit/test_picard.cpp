#include <doctest.h>

#include <cmath>
#include <vector>

#include "popowicz/picard.hpp"
#include "support.hpp"

using namespace popowicz;
using testing::kPi;
using testing::max_diff;
using testing::rel_diff;

namespace {

IterationConfig small_config() {
  IterationConfig c;
  c.max_iter = 30;
  c.fitted_C = 0.85;
  c.max_horizon = 0.5;
  c.tolerance = 1e-11;
  return c;
}

Field wave(const Grid& g, double a, int k, double phase) {
  return Field::sample(g, [=](double x) { return a * std::cos(k * x + phase); });
}

}  // namespace

TEST_CASE("Hermite trajectory is exact on cubics in time") {
  const Grid g(16, 1.0);
  const double dt = 0.25;
  Trajectory traj(g, dt);
  const Field shape = Field::sample(g, [](double x) { return 1.0 + x; });
  auto value = [](double t) { return 0.5 - t + 2.0 * t * t * t; };
  auto slope = [](double t) { return -1.0 + 6.0 * t * t; };
  for (int i = 0; i <= 4; ++i) {
    const double t = i * dt;
    traj.push(State{value(t) * shape, Field::zeros(g), t}, Tendency{slope(t) * shape, Field::zeros(g)});
  }
  CHECK(traj.horizon() == doctest::Approx(1.0));
  for (double t : {0.0, 0.1, 0.37, 0.5, 0.81, 1.0}) {
    CAPTURE(t);
    CHECK(max_diff(traj.at(t).u, value(t) * shape) <= 1e-13);
  }
  CHECK(max_diff(traj.at(5.0).u, traj.state(4).u) == 0.0);
}

TEST_CASE("constant trajectory") {
  const Grid g(32, 2.0 * kPi);
  const State s{wave(g, 1.0, 2, 0.1), wave(g, 0.5, 3, 0.0), 0.0};
  const Trajectory t = Trajectory::constant(s, 0.1, 10);
  CHECK(t.horizon() == doctest::Approx(1.0));
  CHECK(max_diff(t.at(0.43).u, s.u) <= 1e-15);
  CHECK(max_diff(t.at(0.43).v, s.v) <= 1e-15);
}

TEST_CASE("linear transport step") {
  const Grid g(512, 2.0 * kPi);
  const State target{Field::sample(g, [](double x) { return std::exp(std::sin(x)); }),
                     Field::sample(g, [](double x) { return std::cos(2 * x); }), 0.0};

  SUBCASE("zero coefficients leave the target alone") {
    const State out = linear_transport_step(State::zeros(g), target, 0.01);
    CHECK(max_diff(out.u, target.u) == 0.0);
    CHECK(max_diff(out.v, target.v) == 0.0);
  }
  SUBCASE("constant coefficients translate") {
    const State coeff{Field::constant(g, 0.3), Field::constant(g, 0.1), 0.0};
    const double speed = 0.7;
    const double dt = 0.005;
    State s = target;
    for (int i = 0; i < 200; ++i) s = linear_transport_step(coeff, s, dt);
    const Field u_exact = Field::sample(g, [&](double x) { return std::exp(std::sin(x - speed)); });
    const Field v_exact = Field::sample(g, [&](double x) { return std::cos(2 * (x - speed)); });
    CHECK(max_diff(s.u, u_exact) <= 1e-6);
    CHECK(max_diff(s.v, v_exact) <= 1e-6);
  }
  SUBCASE("time-dependent form with frozen coefficients matches") {
    const State coeff{wave(g, 0.2, 1, 0.0), wave(g, 0.1, 2, 0.5), 0.0};
    const State a = linear_transport_step(coeff, target, 0.01);
    const State b = linear_transport_step([&](double) { return coeff; }, target, 0.01);
    CHECK(max_diff(a.u, b.u) == 0.0);
    CHECK(max_diff(a.v, b.v) == 0.0);
  }
}

TEST_CASE("linear tendency with coefficients frozen at the target is the nonlinear tendency") {
  const Grid g(128, 2.0 * kPi);
  const State s{testing::random_trig(g, 12, 3, 2.0), testing::random_trig(g, 12, 4, 2.0), 0.0};
  const Tendency lin = linear_tendency(linear_coefficients(s), s);
  const Tendency full = tendency(s);
  CHECK(rel_diff(lin.du, full.du) <= 1e-12);
  CHECK(rel_diff(lin.dv, full.dv) <= 1e-12);
}

TEST_CASE("iteration config") {
  IterationConfig c;
  CHECK_NOTHROW(c.validate());
  c.T_frac = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("picard.T_frac"), InvalidInput);
  c.T_frac = 0.5;
  c.max_iter = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.max_iter = 10;

  c.fitted_C = 0.5;
  c.max_horizon = 10.0;
  CHECK(iteration_horizon(c, 1.0) == doctest::Approx(0.5));
  c.max_horizon = 0.2;
  CHECK(iteration_horizon(c, 1.0) == doctest::Approx(0.2));
  CHECK(iteration_horizon(c, 0.0) == doctest::Approx(0.2));
  c.horizon = 0.05;
  CHECK(iteration_horizon(c, 1.0) == doctest::Approx(0.05));
}

TEST_CASE("uniform bound right-hand side") {
  CHECK(uniform_bound_rhs(2.0, 0.5, 0.0) == doctest::Approx(2.0));
  CHECK(uniform_bound_rhs(0.0, 0.5, 1.0) == 0.0);
  CHECK(std::isinf(uniform_bound_rhs(1.0, 0.5, 1.0)));
  double prev = 0.0;
  for (double t = 0.0; t < 0.99; t += 0.05) {
    const double r = uniform_bound_rhs(1.0, 0.5, t);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("bound constant fit recovers a known constant") {
  IterateTrace trace;
  trace.data_norm = 1.0;
  for (int i = 0; i <= 20; ++i) trace.times.push_back(0.05 * i);
  IterateRecord rec;
  rec.n = 1;
  for (double t : trace.times) rec.a_series.push_back(1.0 / (1.0 - 2.0 * 0.3 * t));
  trace.records.push_back(rec);
  const std::vector<IterateTrace> traces{trace};
  CHECK(fit_uniform_bound_constant(traces) == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(uniform_bound_check(trace, 0.31).pass);
  CHECK_FALSE(uniform_bound_check(trace, 0.29).pass);
}

TEST_CASE("contraction ratios") {
  IterateTrace trace;
  for (std::size_t n = 1; n <= 5; ++n) {
    IterateRecord r;
    r.n = n;
    r.diff_u = std::pow(0.1, static_cast<double>(n));
    trace.records.push_back(r);
  }
  const std::vector<double> all = contraction_ratios(trace, 1);
  REQUIRE(all.size() == 4);
  for (double r : all) CHECK(r == doctest::Approx(0.1));
  CHECK(contraction_ratios(trace, 3).size() == 2);
  CHECK(contraction_ratios(trace, 1, 5e-3).size() == 2);
}

TEST_CASE("iteration") {
  const Grid g(128, 2.0 * kPi);
  const DyadicCutoffs cutoffs(g);

  SUBCASE("zero data stays zero") {
    const IterationResult r = run_iteration(Field::zeros(g), Field::zeros(g), small_config(), cutoffs);
    CHECK(r.trace.converged);
    CHECK(r.trace.final_gap() == 0.0);
    CHECK(r.final_iterate.at(0.3).u.max_abs() == 0.0);
    CHECK(uniform_bound_check(r.trace, 0.85).pass);
  }

  const Field u0 = wave(g, 0.05, 1, 0.2) + wave(g, 0.02, 3, 1.0);
  const Field v0 = wave(g, 0.03, 2, 0.0);
  const IterationResult r = run_iteration(u0, v0, small_config(), cutoffs);

  SUBCASE("smooth small data converges and contracts") {
    CHECK(r.trace.converged);
    CHECK_FALSE(r.trace.diverged);
    CHECK(r.trace.final_gap() <= 1e-11);
    const std::size_t ramp = truncation_ramp_end(u0, v0, r.trace.besov, cutoffs);
    for (double q : contraction_ratios(r.trace, ramp, 1e-11)) CHECK(q < 1.0);
  }
  SUBCASE("the converged iterate starts at the data") {
    CHECK(max_diff(r.final_iterate.state(0).u, u0) <= 1e-13);
    CHECK(max_diff(r.final_iterate.state(0).v, v0) <= 1e-13);
  }
  SUBCASE("the limit does not depend on the starting guess") {
    IterationConfig c = small_config();
    c.start_from_data = true;
    const IterationResult other = run_iteration(u0, v0, c, cutoffs);
    REQUIRE(other.trace.converged);
    CHECK(trajectory_distance(r.final_iterate, other.final_iterate, BesovParams{1.6, 2.0, 2.0}, cutoffs) <= 1e-8);
    CHECK(trajectory_distance(r.final_iterate, r.final_iterate, BesovParams{1.6, 2.0, 2.0}, cutoffs) <= 1e-15);
  }
  SUBCASE("the limit solves the nonlinear system") {
    SolverConfig sc;
    sc.dt = r.final_iterate.dt();
    sc.t_end = r.final_iterate.horizon();
    const RunSummary direct = simulate(State{u0, v0, 0.0}, sc);
    const State last = r.final_iterate.state(r.final_iterate.size() - 1);
    CHECK(max_diff(direct.final_state.u, last.u) <= 1e-8);
    CHECK(max_diff(direct.final_state.v, last.v) <= 1e-8);
  }
}
