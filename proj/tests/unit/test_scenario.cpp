#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "popowicz/scenario.hpp"
#include "support.hpp"

using namespace popowicz;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal() {
  return json{{"name", "minimal"},
              {"grid", {{"n_points", 64}, {"period", 20.0}}},
              {"solver", {{"dt", 0.05}, {"t_end", 0.5}}},
              {"initial_data",
               {{"space", "momentum"},
                {"m", {{"type", "gaussian_momentum"}, {"amplitude", 0.1}, {"width", 2.0}, {"center", 8.0}}},
                {"n", {{"type", "zero"}}}}}};
}

std::vector<std::string> errors_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& errors, const std::string& needle) {
  for (const std::string& e : errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("popowicz_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const ScenarioConfig c = parse_config(minimal());
  CHECK(c.name == "minimal");
  CHECK(c.grid.size() == 64);
  CHECK(c.solver.dealias_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(c.solver.snapshot_stride == 10);
  CHECK(c.checks.empty());
  CHECK(c.initial.space == DataSpace::momentum);
  CHECK(c.initial.first.kind == ProfileKind::gaussian_momentum);
  CHECK(c.besov.s == doctest::Approx(2.6));
}

TEST_CASE("config errors") {
  SUBCASE("dt not below t_end names both fields") {
    json j = minimal();
    j["solver"]["dt"] = 0.5;
    const auto e = errors_of(j);
    REQUIRE(e.size() == 1);
    CHECK(e[0].find("solver.dt") != std::string::npos);
    CHECK(e[0].find("solver.t_end") != std::string::npos);
  }
  SUBCASE("unknown keys are echoed with their path") {
    json j = minimal();
    j["solver"]["visocity"] = 1.0;
    CHECK(any_contains(errors_of(j), "unknown key 'solver.visocity'"));
  }
  SUBCASE("every error is collected") {
    json j = minimal();
    j.erase("grid");
    j["solver"].erase("t_end");
    j["initial_data"]["m"]["type"] = "sawtooth";
    j["diagnostics"] = {"conservation", "energy"};
    const auto e = errors_of(j);
    CHECK(e.size() >= 4);
    CHECK(any_contains(e, "grid is required"));
    CHECK(any_contains(e, "solver.t_end"));
    CHECK(any_contains(e, "sawtooth"));
    CHECK(any_contains(e, "energy"));
  }
  SUBCASE("checks that need parameters") {
    json j = minimal();
    j["diagnostics"] = {"peakon_speed", "growth_bound", "continuous_dependence"};
    const auto e = errors_of(j);
    CHECK(any_contains(e, "peakon_check"));
    CHECK(any_contains(e, "growth_constant"));
    CHECK(any_contains(e, "dependence"));
  }
  SUBCASE("odd symmetry needs odd data") {
    json j = minimal();
    j["diagnostics"] = {"odd_symmetry"};
    CHECK_FALSE(errors_of(j).empty());
  }
  SUBCASE("advective bound") {
    json j = minimal();
    j["solver"]["dt"] = 0.4;
    CHECK(any_contains(errors_of(j), "advective bound"));
  }
  SUBCASE("peakons are velocity profiles") {
    json j = minimal();
    j["initial_data"]["m"] = {{"type", "peakon"}, {"c", 1.0}};
    CHECK(any_contains(errors_of(j), "velocity profile"));
  }
  SUBCASE("besov exponents accept inf") {
    json j = minimal();
    j["besov"] = {{"s", 1.0}, {"p", "inf"}, {"r", "inf"}};
    const ScenarioConfig c = parse_config(j);
    CHECK(std::isinf(c.besov.p));
    CHECK(std::isinf(c.besov.r));
    j["besov"]["p"] = "infinite";
    CHECK_FALSE(errors_of(j).empty());
  }
  SUBCASE("not an object") { CHECK_THROWS_AS(parse_config(json::array()), ConfigError); }
}

TEST_CASE("every builtin parses and has a unique name") {
  std::set<std::string> names;
  for (const BuiltinScenario& b : builtin_scenarios()) {
    CAPTURE(b.name);
    CHECK(names.insert(b.name).second);
    CHECK_FALSE(b.description.empty());
    const ScenarioConfig c = parse_config(b.config);
    CHECK(c.name == b.name);
  }
  CHECK(builtin_config("thm43_positive_momentum").has_value());
  CHECK_FALSE(builtin_config("nope").has_value());
}

TEST_CASE("initial profiles") {
  const Grid g(256, 20.0);
  SUBCASE("gaussian is periodic and positive") {
    ProfileSpec s;
    s.kind = ProfileKind::gaussian_momentum;
    s.amplitude = 1.0;
    s.width = 2.0;
    s.center = 1.25;
    const Field f = sample_profile(s, g);
    CHECK(f.min() > 0.0);
    CHECK(f.max() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f[g.size() - 1] > f[g.size() / 2]);
  }
  SUBCASE("peakon crest") {
    ProfileSpec s;
    s.kind = ProfileKind::peakon;
    s.c = 1.5;
    s.center = 5.0;
    const Field f = sample_profile(s, g);
    CHECK(f.max() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(f[64] == f.max());
  }
  SUBCASE("fourier modes") {
    ProfileSpec s;
    s.kind = ProfileKind::fourier_modes;
    s.modes = {{2, 0.5, 0.0}};
    const Field f = sample_profile(s, g);
    CHECK(f[0] == doctest::Approx(0.5));
    CHECK(f[64] == doctest::Approx(-0.5));
  }
  SUBCASE("zero") { CHECK(sample_profile(ProfileSpec{}, g).max_abs() == 0.0); }
}

TEST_CASE("run_scenario on a small config") {
  json j = minimal();
  j["diagnostics"] = {"conservation", "sign", "l1_bound", "pushforward"};
  j["solver"]["snapshot_stride"] = 2;
  const ScenarioConfig c = parse_config(j);
  const ScenarioResult r = run_scenario(c);
  CHECK(r.summary.completed());
  REQUIRE(r.verdicts.size() == 5);
  CHECK(r.verdicts[0].name == "run_completed");
  CHECK(r.passed());
  CHECK(r.maps.size() == r.record.size());
}

TEST_CASE("artifacts are deterministic") {
  json j = minimal();
  j["diagnostics"] = {"conservation"};
  const ScenarioConfig c = parse_config(j);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  RunOptions oa, ob;
  oa.out_dir = a;
  ob.out_dir = b;
  run_scenario(c, oa);
  run_scenario(c, ob);
  for (const char* f : {"config.json", "verdicts.json", "diagnostics.csv", "snapshots.csv", "summary.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary.at("abort_reason").is_null());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("an aborted run still writes its artifact") {
  json j = minimal();
  j["name"] = "collapse";
  j["grid"] = {{"n_points", 256}, {"period", 40.0}};
  j["solver"] = {{"dt", 0.02}, {"t_end", 20.0}, {"snapshot_stride", 10}};
  j["initial_data"] = {
      {"space", "momentum"},
      {"m", {{"type", "fourier_modes"}, {"modes", {{{"k", 2}, {"amp", 0.6}}, {{"k", 5}, {"amp", 0.3}, {"phase", 0.7}}}}}},
      {"n", {{"type", "gaussian_momentum"}, {"amplitude", 0.2}, {"width", 2.0}, {"center", 20.0}}}};
  j["diagnostics"] = {"conservation"};
  const ScenarioConfig c = parse_config(j);
  const fs::path dir = scratch("abort");
  RunOptions o;
  o.out_dir = dir;
  const ScenarioResult r = run_scenario(c, o);
  CHECK_FALSE(r.summary.completed());
  CHECK_FALSE(r.verdicts[0].pass);
  CHECK_FALSE(r.passed());
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("abort_reason").is_string());
  CHECK(summary.at("t_final").get<double>() < 20.0);
  CHECK(fs::exists(dir / "diagnostics.csv"));
  fs::remove_all(dir);
}

TEST_CASE("random smooth states are seeded") {
  const Grid g(64, 2.0 * testing::kPi);
  const State a = random_smooth_state(g, 5, 0.02, 0.15);
  const State b = random_smooth_state(g, 5, 0.02, 0.15);
  const State c = random_smooth_state(g, 6, 0.02, 0.15);
  CHECK(testing::max_diff(a.u, b.u) == 0.0);
  CHECK(testing::max_diff(a.u, c.u) > 0.0);
}

TEST_CASE("growth constant calibration reproduces the frozen value") {
  const ScenarioConfig base = parse_config(*builtin_config("thm43_positive_momentum"));
  const double C = calibrate_growth_constant(base, 99, 8, 4);
  CHECK(C == doctest::Approx(0.2905).epsilon(1e-3));
  CHECK(base.growth_constant.value() >= C);
}
