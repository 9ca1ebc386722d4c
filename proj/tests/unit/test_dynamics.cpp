#include <doctest.h>

#include <cmath>
#include <vector>

#include "popowicz/dynamics.hpp"
#include "support.hpp"

using namespace popowicz;
using testing::kPi;
using testing::max_diff;
using testing::rel_diff;

namespace {

State smooth_state(std::size_t n = 128) {
  const Grid g(n, 2.0 * kPi);
  return State{Field::sample(g, [](double x) { return 0.3 * std::cos(x) + 0.1 * std::sin(3 * x); }),
               Field::sample(g, [](double x) { return 0.2 * std::sin(2 * x) - 0.05 * std::cos(5 * x); }), 0.0};
}

State gaussian_state(std::size_t n, double period) {
  const Grid g(n, period);
  auto bump = [period](double a, double w, double c) {
    return [=](double x) {
      double s = 0.0;
      for (int k = -3; k <= 3; ++k) {
        const double y = x - c + k * period;
        s += a * std::exp(-y * y / (w * w));
      }
      return s;
    };
  };
  return State{Field::sample(g, bump(0.15, 2.0, 15.0)), Field::sample(g, bump(0.09, 3.0, 25.0)), 0.0};
}

State integrate(State s, double dt, double t_end) {
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t i = 0; i < steps; ++i) s = step_rk4(s, dt);
  return s;
}

}  // namespace

TEST_CASE("velocity and momentum forms") {
  const Grid g(64, 2.0 * kPi);
  const State s{Field::sample(g, [](double x) { return std::sin(x); }),
                Field::sample(g, [](double x) { return std::cos(2 * x); }), 0.0};
  const MomentumState ms = momentum(s);
  CHECK(max_diff(ms.m, Field::sample(g, [](double x) { return 2.0 * std::sin(x); })) <= 1e-12);
  CHECK(max_diff(ms.n, Field::sample(g, [](double x) { return 5.0 * std::cos(2 * x); })) <= 1e-12);

  const State r{testing::random_trig(g, 20, 4), testing::random_trig(g, 20, 5), 1.5};
  const State back = velocity(momentum(r));
  CHECK(rel_diff(back.u, r.u) <= 1e-10);
  CHECK(rel_diff(back.v, r.v) <= 1e-10);
  CHECK(back.time == 1.5);
}

TEST_CASE("right-hand sides on single modes") {
  const Grid g(64, 2.0 * kPi);
  for (double eps : {1e-3, 0.1, 0.5}) {
    CAPTURE(eps);
    SUBCASE("F with v = 0 is -3/5 eps^2 sin 2x") {
      const State s{Field::sample(g, [&](double x) { return eps * std::sin(x); }), Field::zeros(g), 0.0};
      const Field expected = Field::sample(g, [&](double x) { return -0.6 * eps * eps * std::sin(2 * x); });
      CHECK(max_diff(rhs_F(s), expected) <= 1e-12 * std::max(1.0, eps * eps));
      CHECK(rhs_H(s).max_abs() == 0.0);
    }
    SUBCASE("H with u = 0 is -eps^2/10 sin 2x") {
      const State s{Field::zeros(g), Field::sample(g, [&](double x) { return eps * std::sin(x); }), 0.0};
      const Field expected = Field::sample(g, [&](double x) { return -0.1 * eps * eps * std::sin(2 * x); });
      CHECK(max_diff(rhs_H(s), expected) <= 1e-12 * std::max(1.0, eps * eps));
    }
  }
  const State zero = State::zeros(g);
  CHECK(rhs_F(zero).max_abs() == 0.0);
  CHECK(rhs_H(zero).max_abs() == 0.0);
  const State flat{Field::constant(g, 0.7), Field::constant(g, -0.2), 0.0};
  const Tendency t = tendency(flat);
  CHECK(t.du.max_abs() <= 1e-15);
  CHECK(t.dv.max_abs() <= 1e-15);
}

TEST_CASE("velocity tendency agrees with an independent momentum-form evaluation") {
  const State s = smooth_state();
  const Field ux = derivative(s.u), vx = derivative(s.v);
  const MomentumState ms = momentum(s);
  const Field G = 2.0 * s.u + s.v;
  const Field Gx = 2.0 * ux + vx;
  const Field mt = -1.0 * (G * derivative(ms.m)) - 3.0 * (Gx * ms.m);
  const Field nt = -1.0 * (G * derivative(ms.n)) - 2.0 * (Gx * ms.n);

  const Tendency vt = tendency(s);
  CHECK(rel_diff(helmholtz_forward(vt.du), mt) <= 1e-10);
  CHECK(rel_diff(helmholtz_forward(vt.dv), nt) <= 1e-10);
  CHECK(momentum_form_mismatch(s) <= 1e-10);
}

TEST_CASE("RK4 is fourth order in time") {
  const State s0 = smooth_state(32);
  const double t_end = 1.0;
  const State ref = integrate(s0, 1.0 / 192.0, t_end);
  auto err = [&](double dt) {
    const State s = integrate(s0, dt, t_end);
    return std::max(max_diff(s.u, ref.u), max_diff(s.v, ref.v));
  };
  const double e1 = err(1.0 / 12.0), e2 = err(1.0 / 24.0);
  const double order = std::log2(e1 / e2);
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);
}

TEST_CASE("step keeps constants and zero fixed") {
  const Grid g(32, 3.0);
  const State flat{Field::constant(g, 0.4), Field::constant(g, 0.1), 0.0};
  const State next = step_rk4(flat, 0.01);
  CHECK(max_diff(next.u, flat.u) <= 1e-15);
  CHECK(max_diff(next.v, flat.v) <= 1e-15);
  CHECK(next.time == doctest::Approx(0.01));
  CHECK(step_rk4(State::zeros(g), 0.1).u.max_abs() == 0.0);
}

TEST_CASE("non-finite input is rejected before stepping") {
  State s = smooth_state(32);
  s.v[4] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(step_rk4(s, 0.01), InvalidInput);
}

TEST_CASE("solver config validation") {
  const State s = smooth_state(64);
  SolverConfig c;
  c.dt = 0.5;
  c.t_end = 0.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("solver.t_end"), InvalidInput);
  c.dt = -1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("solver.dt must be positive"), InvalidInput);
  c.dt = 0.01;
  c.t_end = 1.0;
  c.snapshot_stride = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.snapshot_stride = 1;
  c.dealias_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.dealias_fraction = 2.0 / 3.0;
  CHECK_NOTHROW(c.validate_for(s));
  c.dt = 1.5 * stable_time_step(s, 0.5);
  c.t_end = 10.0;
  CHECK_THROWS_WITH_AS(c.validate_for(s), doctest::Contains("advective bound"), InvalidInput);
}

TEST_CASE("simulate") {
  const State s0 = smooth_state(64);
  SolverConfig c;
  c.dt = 0.01;
  c.t_end = 0.0;

  SUBCASE("zero duration returns the initial state") {
    const RunSummary r = simulate(s0, c);
    CHECK(r.steps == 0);
    CHECK(r.completed());
    CHECK(max_diff(r.final_state.u, s0.u) == 0.0);
  }
  SUBCASE("lands exactly on t_end and visits every stride") {
    c.t_end = 0.105;
    c.snapshot_stride = 4;
    std::vector<std::size_t> seen;
    const std::vector<Observer> obs{{"steps", [&](const State&, std::size_t k) { seen.push_back(k); }}};
    const RunSummary r = simulate(s0, c, obs);
    CHECK(r.steps == 11);
    CHECK(r.t_final == doctest::Approx(0.105).epsilon(1e-14));
    CHECK(seen == std::vector<std::size_t>{0, 4, 8, 11});
  }
  SUBCASE("a throwing observer aborts and is named") {
    c.t_end = 1.0;
    c.snapshot_stride = 1;
    const std::vector<Observer> obs{{"tripwire", [](const State& s, std::size_t) {
                                       if (s.time > 0.25) throw std::runtime_error("tripped");
                                     }}};
    const RunSummary r = simulate(s0, c, obs);
    CHECK_FALSE(r.completed());
    REQUIRE(r.failed_observer.has_value());
    CHECK(*r.failed_observer == "tripwire");
    CHECK(r.t_final < 0.3);
  }
  SUBCASE("a stepper producing non-finite values aborts") {
    c.t_end = 0.1;
    const Stepper bad = [](const State& s, double dt) -> State {
      throw SolverAbort("non-finite values", s.time + dt);
    };
    const RunSummary r = simulate(s0, c, {}, bad);
    CHECK_FALSE(r.completed());
    CHECK(r.steps == 0);
  }
}

TEST_CASE("total momentum is conserved on the circle") {
  const State s0 = gaussian_state(256, 40.0);
  SolverConfig c;
  c.dt = 0.05;
  c.t_end = 5.0;
  const RunSummary r = simulate(s0, c);
  REQUIRE(r.completed());
  CHECK(r.conserved_drift <= 1e-10);
  CHECK(std::abs(total_momentum(r.final_state) - total_momentum(s0)) <= 1e-10 * total_momentum(s0));
}

TEST_CASE("v = 0 stays zero and u = 0 stays zero") {
  const State g = gaussian_state(256, 40.0);
  SolverConfig c;
  c.dt = 0.05;
  c.t_end = 3.0;
  const RunSummary only_u = simulate(State{g.u, Field::zeros(g.grid()), 0.0}, c);
  CHECK(only_u.final_state.v.max_abs() <= 1e-14);
  const RunSummary only_v = simulate(State{Field::zeros(g.grid()), g.v, 0.0}, c);
  CHECK(only_v.final_state.u.max_abs() <= 1e-14);
}

TEST_CASE("flows commute with translation by a grid node") {
  const State s = gaussian_state(128, 40.0);
  auto shift = [](const Field& f, std::size_t k) {
    Field out = f;
    for (std::size_t i = 0; i < f.size(); ++i) out[(i + k) % f.size()] = f[i];
    return out;
  };
  const State shifted{shift(s.u, 13), shift(s.v, 13), 0.0};
  const State a = integrate(s, 0.05, 1.0);
  const State b = integrate(shifted, 0.05, 1.0);
  CHECK(max_diff(shift(a.u, 13), b.u) <= 1e-12);
  CHECK(max_diff(shift(a.v, 13), b.v) <= 1e-12);
}
