#include "popowicz/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <set>

#include "popowicz/field_io.hpp"
#include "popowicz/parallel.hpp"
#include "popowicz/scenario.hpp"

namespace popowicz {
namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Verdict bounded(std::string name, double value, double tolerance, std::string detail = {}) {
  return Verdict{std::move(name), value <= tolerance, value, tolerance, std::move(detail)};
}

double rel_diff(const Field& a, const Field& b) {
  const double scale = std::max(b.max_abs(), 1e-300);
  return (a - b).max_abs() / scale;
}

// Real field with random coefficients on modes 1..k_max, amplitude
// (1 + k)^-decay, plus a random mean.
Field random_band_field(const Grid& grid, std::size_t k_max, double decay, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Spectrum spec(grid.mode_count(), {0.0, 0.0});
  const double n = static_cast<double>(grid.size());
  spec[0] = {n * g(rng), 0.0};
  for (std::size_t k = 1; k <= k_max && k + 1 < grid.mode_count(); ++k) {
    const double a = std::pow(1.0 + static_cast<double>(k), -decay);
    spec[k] = {0.5 * n * a * g(rng), 0.5 * n * a * g(rng)};
  }
  return inverse_transform(grid, std::move(spec));
}

std::size_t exact_mode_limit(const DyadicCutoffs& cutoffs) {
  const Grid& grid = cutoffs.grid();
  std::size_t k = 0;
  while (k + 1 < grid.mode_count() && grid.wavenumber(k + 1) <= cutoffs.exact_band()) ++k;
  return k;
}

double gaussian_helmholtz_exact(double y, double w) {
  // p * exp(-(x/w)^2) with p = exp(-|x|)/2.
  const double c = 0.25 * std::sqrt(std::numbers::pi) * w * std::exp(0.25 * w * w);
  return c * (std::exp(-y) * std::erfc(0.5 * w - y / w) + std::exp(y) * std::erfc(0.5 * w + y / w));
}

void apply_mutations(ScenarioConfig& cfg, const std::map<std::string, double>& mutations) {
  for (const auto& [name, value] : mutations) {
    if (name == "pushforward_m_exponent") cfg.pushforward_exponents.m = value;
    if (name == "pushforward_n_exponent") cfg.pushforward_exponents.n = value;
    if (name == "l1_m_rate") cfg.l1_rates.m_rate = value;
    if (name == "l1_n_rate") cfg.l1_rates.n_rate = value;
  }
}

// Which scenario verdicts a suite reports; an empty filter keeps all.
struct ScenarioUse {
  std::string scenario;
  std::set<std::string> only;
};

struct SuitePlan {
  bool spectral = false;
  bool lp = false;
  bool picard = false;
  bool mutation_probes = false;
  std::vector<ScenarioUse> scenarios;
};

SuitePlan plan_for(const std::string& suite) {
  SuitePlan plan;
  if (suite == "core" || suite == "all") {
    plan.spectral = true;
    plan.scenarios.push_back({"thm43_positive_momentum", {"run_completed", "conservation"}});
    plan.scenarios.push_back({"ch_reduction_peakon", {}});
    plan.scenarios.push_back({"dp_reduction_peakon", {}});
    plan.scenarios.push_back({"sign_changing_watch", {}});
  }
  if (suite == "lp" || suite == "all") plan.lp = true;
  if (suite == "picard" || suite == "all") {
    plan.picard = true;
    plan.scenarios.push_back({"continuous_dependence", {}});
  }
  if (suite == "lagrangian" || suite == "all") {
    plan.mutation_probes = true;
    plan.scenarios.push_back({"thm43_positive_momentum", {}});
    plan.scenarios.push_back({"lagrangian_pushforward", {}});
    plan.scenarios.push_back({"thm44_odd_data", {}});
    plan.scenarios.push_back({"l1_rate_probe", {}});
  }
  return plan;
}

// Deviation of the pushforward invariants under deliberately wrong exponents.
Verdict pushforward_sensitivity(const std::string& prefix, const ScenarioResult& r) {
  const std::size_t n = std::min(r.maps.size(), r.record.momenta.size());
  const auto maps = std::span(r.maps).first(n);
  const auto momenta = std::span(r.record.momenta).first(n);
  const double wrong_m = pushforward_invariants(maps, momenta, {2.0, 2.0}).deviation_m;
  const double wrong_n = pushforward_invariants(maps, momenta, {3.0, 3.0}).deviation_n;
  const double worst = std::min(wrong_m, wrong_n);
  const double required = 1e3 * 1e-6;
  return Verdict{prefix + "pushforward_mutation_sensitivity", worst >= required, worst, required,
                 "deviation with m exponent 2: " + format_number(wrong_m) +
                     ", with n exponent 3: " + format_number(wrong_n) + "; must reach 1e3 x tolerance"};
}

// With 4 C0 replaced by C0 / 4 the m bound must be violated at some snapshot.
Verdict l1_rate_sensitivity(const std::string& prefix, const ScenarioResult& r) {
  const Verdict mutated = l1_bound_check(r.record, L1Rates{0.25, 2.0});
  return Verdict{prefix + "l1_mutation_sensitivity", !mutated.pass, mutated.worst_value, 1.0,
                 "l1 bound with m rate C0/4 must fail; worst ratio " + format_number(mutated.worst_value)};
}

}  // namespace

std::vector<Verdict> picard_verdicts(const PicardRun& run) {
  const IterateTrace& t = run.result.trace;
  std::vector<Verdict> out;
  Verdict conv{"picard_smooth/converged", t.converged && !t.diverged, t.final_gap(), t.records.empty() ? 0.0 : 1e-10,
               t.abort_reason.value_or("")};
  out.push_back(conv);
  double worst = 0.0;
  for (double q : run.ratios) worst = std::max(worst, q);
  Verdict ratio = bounded("picard_smooth/contraction", worst, 0.8,
                          "successive-difference ratios after iterate " + std::to_string(run.ramp_end));
  if (run.ratios.empty()) {
    ratio.pass = false;
    ratio.detail += "; no ratios beyond the truncation ramp";
  }
  out.push_back(ratio);
  out.push_back(bounded("picard_smooth/nonlinear_distance", run.nonlinear_distance, 1e-6,
                        "sup over t of the B^{s-1} distance between the final iterate and the solver"));
  out.push_back(Verdict{"picard_smooth/uniform_bound", run.bound.pass, run.bound.worst_ratio, 1.0,
                        "fitted C = " + format_number(run.fitted_C)});
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"core", "lp", "picard", "lagrangian", "all"};
  return names;
}

const std::vector<std::string>& known_mutations() {
  static const std::vector<std::string> names{"pushforward_m_exponent", "pushforward_n_exponent", "l1_m_rate",
                                              "l1_n_rate"};
  return names;
}

std::vector<Verdict> spectral_checks() {
  std::vector<Verdict> out;
  const Grid grid(256, 10.0);
  const double k = kTwoPi * 3.0 / grid.period();
  const Field f = Field::sample(grid, [&](double x) { return std::sin(k * x) + 0.5 * std::cos(2.0 * k * x + 0.3); });
  const Field df = Field::sample(grid, [&](double x) { return k * std::cos(k * x) - k * std::sin(2.0 * k * x + 0.3); });
  out.push_back(bounded("spectral/derivative", rel_diff(derivative(f), df), 1e-12));

  const HelmholtzKernel kernel(grid);
  out.push_back(bounded("spectral/helmholtz_roundtrip", rel_diff(helmholtz_forward(helmholtz_inverse(f, kernel)), f),
                        1e-12));
  out.push_back(bounded("spectral/kernel_derivative",
                        rel_diff(kernel_derivative_convolve(f, kernel), derivative(helmholtz_inverse(f, kernel))),
                        1e-12));

  const Grid wide(2048, 80.0);
  const HelmholtzKernel wide_kernel(wide);
  const double w = 1.5;
  const double c = 40.0;
  const Field bump = Field::sample(wide, [&](double x) { return std::exp(-((x - c) / w) * ((x - c) / w)); });
  const Field exact = Field::sample(wide, [&](double x) { return gaussian_helmholtz_exact(x - c, w); });
  out.push_back(bounded("spectral/helmholtz_green_function", rel_diff(helmholtz_inverse(bump, wide_kernel), exact),
                        1e-10, "p * exp(-(x/w)^2) against its closed form"));

  const Grid box(128, kTwoPi);
  const State s{Field::sample(box, [](double x) { return 0.3 * std::cos(x) + 0.1 * std::sin(2.0 * x); }),
                Field::sample(box, [](double x) { return 0.2 * std::sin(x + 0.4) + 0.05 * std::cos(3.0 * x); }), 0.0};
  out.push_back(bounded("dynamics/momentum_form", momentum_form_mismatch(s), 1e-10,
                        "(1 - d_xx) of the velocity tendency against the momentum equations"));
  return out;
}

std::vector<Verdict> lp_identity_checks(std::uint64_t seed) {
  std::vector<Verdict> out;
  const Grid grid(256, kTwoPi);
  const DyadicCutoffs cutoffs(grid);
  std::mt19937_64 rng(seed);

  double pou = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double xi = 0.01 * i;
    double sum = lp_chi(xi);
    for (int j = 0; j <= 12; ++j) sum += lp_phi(std::ldexp(xi, -j));
    pou = std::max(pou, std::abs(sum - 1.0));
  }
  for (std::size_t m = 0; m < grid.mode_count(); ++m) {
    if (grid.wavenumber(m) > cutoffs.exact_band()) break;
    double sum = 0.0;
    for (int j = -1; j <= cutoffs.j_max(); ++j) sum += cutoffs.window(j, m);
    pou = std::max(pou, std::abs(sum - 1.0));
  }
  out.push_back(bounded("lp/partition_of_unity", pou, 1e-10));

  const std::size_t band = exact_mode_limit(cutoffs);
  const Field f = random_band_field(grid, band, 1.0, rng);
  out.push_back(bounded("lp/reconstruction", rel_diff(decompose(f, cutoffs).sum(), f), 1e-10,
                        "band-limited to mode " + std::to_string(band)));

  const std::size_t product_band = std::min(band, grid.size() / 6);
  const Field u = random_band_field(grid, product_band, 1.0, rng);
  const Field v = random_band_field(grid, product_band, 1.0, rng);
  const Field bony = paraproduct(u, v, cutoffs) + paraproduct(v, u, cutoffs) + remainder(u, v, cutoffs);
  out.push_back(bounded("lp/bony_identity", rel_diff(bony, u * v), 1e-8));

  double ortho = 0.0;
  const LPDecomposition d = decompose(f, cutoffs);
  for (int j = -1; j <= cutoffs.j_max(); ++j) {
    for (int k = j + 2; k <= cutoffs.j_max(); ++k) {
      ortho = std::max(ortho, dyadic_block(d.block(k), j, cutoffs).max_abs() / f.max_abs());
    }
  }
  out.push_back(bounded("lp/almost_orthogonality", ortho, 1e-12, "Delta_j Delta_k f for |j - k| >= 2"));
  return out;
}

ProductEstimateSweep product_estimate_sweep(std::uint64_t seed, std::size_t pairs) {
  const BesovParams params{2.6, 2.0, 2.0};
  auto sweep = [&](std::size_t n) {
    const Grid grid(n, kTwoPi);
    const DyadicCutoffs cutoffs(grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      std::mt19937_64 rng(seed + 104729 * i);
      const Field u = random_band_field(grid, n / 8, 1.5, rng);
      const Field v = random_band_field(grid, n / 8, 1.5, rng);
      if (const auto ratio = product_estimate_ratio(u, v, params, cutoffs)) worst = std::max(worst, *ratio);
    }
    return worst;
  };
  ProductEstimateSweep out;
  out.max_ratio_coarse = sweep(256);
  out.max_ratio_fine = sweep(1024);
  const double lo = std::min(out.max_ratio_coarse, out.max_ratio_fine);
  const double hi = std::max(out.max_ratio_coarse, out.max_ratio_fine);
  out.change = lo > 0.0 ? hi / lo : INFINITY;
  return out;
}

Verdict product_estimate_check(std::uint64_t seed, std::size_t pairs) {
  const ProductEstimateSweep s = product_estimate_sweep(seed, pairs);
  return Verdict{"lp/product_estimate_uniformity", s.change < 2.0, s.change, 2.0,
                 "max ratio " + format_number(s.max_ratio_coarse) + " at N = 256, " +
                     format_number(s.max_ratio_fine) + " at N = 1024"};
}

SuiteReport verify_suite(const std::string& name, const VerifyOptions& options) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw InvalidInput("unknown suite '" + name + "' (expected core, lp, picard, lagrangian or all)");
  }
  for (const auto& [mutation, value] : options.mutations) {
    const auto& known = known_mutations();
    if (std::find(known.begin(), known.end(), mutation) == known.end()) {
      throw InvalidInput("unknown mutation '" + mutation + "'");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const SuitePlan plan = plan_for(name);
  const std::size_t workers = std::max<std::size_t>(1, options.workers);

  std::vector<std::string> scenario_names;
  for (const ScenarioUse& use : plan.scenarios) {
    if (std::find(scenario_names.begin(), scenario_names.end(), use.scenario) == scenario_names.end()) {
      scenario_names.push_back(use.scenario);
    }
  }
  std::vector<ScenarioConfig> configs;
  for (const std::string& s : scenario_names) {
    configs.push_back(parse_config(*builtin_config(s)));
    apply_mutations(configs.back(), options.mutations);
  }

  std::vector<std::optional<ScenarioResult>> results(configs.size());
  std::optional<PicardRun> picard;
  std::vector<Verdict> lp_verdicts;
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    jobs.push_back([&, i] {
      RunOptions ro;
      if (options.out_dir) ro.out_dir = *options.out_dir / configs[i].name;
      results[i].emplace(run_scenario(configs[i], ro));
    });
  }
  if (plan.picard) {
    jobs.push_back([&] {
      const ScenarioConfig cfg = parse_config(*builtin_config("picard_smooth"));
      picard = run_picard(cfg, workers);
      if (options.out_dir) write_picard_artifact(*options.out_dir / "picard_smooth", cfg, *picard);
    });
  }
  if (plan.lp) {
    jobs.push_back([&] {
      lp_verdicts = lp_identity_checks(options.seed);
      lp_verdicts.push_back(product_estimate_check(options.seed));
    });
  }
  parallel_for(jobs.size(), workers, [&](std::size_t i) { jobs[i](); });

  SuiteReport report;
  report.suite = name;
  std::set<std::string> seen;
  auto add = [&](Verdict v) {
    if (seen.insert(v.name).second) report.verdicts.push_back(std::move(v));
  };
  if (plan.spectral) {
    for (Verdict& v : spectral_checks()) add(std::move(v));
  }
  for (Verdict& v : lp_verdicts) add(std::move(v));
  if (picard) {
    for (Verdict& v : picard_verdicts(*picard)) add(std::move(v));
  }
  for (const ScenarioUse& use : plan.scenarios) {
    const std::size_t i = static_cast<std::size_t>(
        std::find(scenario_names.begin(), scenario_names.end(), use.scenario) - scenario_names.begin());
    const std::string prefix = use.scenario + "/";
    for (const Verdict& v : results[i]->verdicts) {
      if (!use.only.empty() && !use.only.count(v.name)) continue;
      Verdict named = v;
      named.name = prefix + v.name;
      add(std::move(named));
    }
    if (plan.mutation_probes && use.scenario == "lagrangian_pushforward") add(pushforward_sensitivity(prefix, *results[i]));
    if (plan.mutation_probes && use.scenario == "l1_rate_probe") add(l1_rate_sensitivity(prefix, *results[i]));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    json j = report_to_json(report);
    if (!options.mutations.empty()) j["mutations"] = options.mutations;
    write_json(*options.out_dir / "report.json", j);
  }
  return report;
}

json report_to_json(const SuiteReport& report) {
  return {{"suite", report.suite},
          {"pass", report.pass()},
          {"wall_seconds", report.wall_seconds},
          {"checks", verdicts_to_json(report.verdicts)}};
}

}  // namespace popowicz
