#include <doctest.h>

#include <algorithm>

#include "popowicz/verify.hpp"

using namespace popowicz;

namespace {

const Verdict* find(const SuiteReport& r, const std::string& name) {
  const auto it = std::find_if(r.verdicts.begin(), r.verdicts.end(), [&](const Verdict& v) { return v.name == name; });
  return it == r.verdicts.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("suite and mutation names") {
  CHECK(suite_names().size() == 5);
  CHECK_THROWS_AS(verify_suite("everything"), InvalidInput);
  VerifyOptions o;
  o.mutations["viscosity"] = 1.0;
  CHECK_THROWS_AS(verify_suite("lp", o), InvalidInput);
}

TEST_CASE("lp suite passes") {
  const SuiteReport r = verify_suite("lp");
  CHECK(r.pass());
  CHECK(r.verdicts.size() >= 5);
  const nlohmann::json j = report_to_json(r);
  CHECK(j.at("suite") == "lp");
  CHECK(j.at("pass") == true);
  CHECK(j.at("checks").size() == r.verdicts.size());
}

TEST_CASE("spectral checks pass") {
  for (const Verdict& v : spectral_checks()) {
    CAPTURE(v.name);
    CAPTURE(v.worst_value);
    CHECK(v.pass);
  }
}

TEST_CASE("product estimate sweep is stable under refinement") {
  const ProductEstimateSweep s = product_estimate_sweep(20240611, 20);
  CHECK(s.max_ratio_coarse > 0.0);
  CHECK(s.max_ratio_fine > 0.0);
  CHECK(s.change >= 1.0);
  CHECK(s.change <= 1.5);
}

TEST_CASE("a wrong pushforward exponent is caught") {
  VerifyOptions o;
  o.workers = 4;
  o.mutations["pushforward_m_exponent"] = 2.0;
  const SuiteReport r = verify_suite("lagrangian", o);
  CHECK_FALSE(r.pass());
  const Verdict* v = find(r, "lagrangian_pushforward/pushforward");
  REQUIRE(v != nullptr);
  CHECK_FALSE(v->pass);
}
