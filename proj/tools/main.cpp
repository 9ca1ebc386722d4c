#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "popowicz/field_io.hpp"
#include "popowicz/littlewood_paley.hpp"
#include "popowicz/parallel.hpp"
#include "popowicz/plots.hpp"
#include "popowicz/scenario.hpp"
#include "popowicz/verify.hpp"

namespace fs = std::filesystem;
using namespace popowicz;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kAbort = 3 };

void print_verdicts(const std::vector<Verdict>& verdicts) {
  for (const Verdict& v : verdicts) {
    std::printf("%-4s %-58s worst=%-12.4g tol=%-10.3g %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.worst_value,
                v.tolerance, v.detail.c_str());
  }
}

// "builtin:NAME" selects a shipped scenario; anything else is a path.
ScenarioConfig load_config(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) {
    const auto j = builtin_config(spec.substr(prefix.size()));
    if (!j) throw InvalidInput("no builtin scenario named '" + spec.substr(prefix.size()) + "'");
    return parse_config(*j);
  }
  if (!fs::exists(spec)) throw InvalidInput("config file not found: " + spec);
  return parse_config(fs::path(spec));
}

double parse_exponent(const std::string& s, const char* flag) {
  if (s == "inf") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidInput(std::string(flag) + " must be a number or \"inf\", got '" + s + "'");
}

int cmd_simulate(const std::string& config_path, const fs::path& out, bool plots) {
  const ScenarioConfig cfg = load_config(config_path);
  RunOptions opts;
  opts.out_dir = out;
  opts.plots = plots;
  opts.workers = worker_count();
  const ScenarioResult r = run_scenario(cfg, opts);
  std::printf("%s: %zu steps to t = %.6g (%.2f s)\n", cfg.name.c_str(), r.summary.steps, r.summary.t_final,
              r.wall_seconds);
  print_verdicts(r.verdicts);
  if (r.summary.abort_reason) {
    std::fprintf(stderr, "solver abort: %s\n", r.summary.abort_reason->c_str());
    return kAbort;
  }
  return r.passed() ? kOk : kCheckFailed;
}

int cmd_picard(const std::string& config_path, const fs::path& out) {
  const ScenarioConfig cfg = load_config(config_path);
  if (!cfg.picard) throw InvalidInput("config '" + cfg.name + "' has no picard section");
  const PicardRun run = run_picard(cfg, worker_count());
  write_picard_artifact(out, cfg, run);
  const IterateTrace& t = run.result.trace;
  std::printf("%s: %zu iterates, final gap %.3g, fitted C %.6g, horizon %.6g\n", cfg.name.c_str(), t.records.size(),
              t.final_gap(), run.fitted_C, t.horizon);
  const std::vector<Verdict> verdicts = picard_verdicts(run);
  print_verdicts(verdicts);
  if (t.abort_reason) {
    std::fprintf(stderr, "iteration abort: %s\n", t.abort_reason->c_str());
    return kAbort;
  }
  return all_pass(verdicts) ? kOk : kCheckFailed;
}

int cmd_lp(const fs::path& input, double s, const std::string& p_text, const std::string& r_text) {
  const BesovParams params{s, parse_exponent(p_text, "-p"), parse_exponent(r_text, "-r")};
  params.validate();
  const Field f = read_field_csv(input);
  const DyadicCutoffs cutoffs(f.grid());
  const LPDecomposition d = decompose(f, cutoffs);
  nlohmann::json blocks = nlohmann::json::array();
  for (int j = -1; j <= d.j_max(); ++j) {
    blocks.push_back({{"j", j}, {"l2", lp_norm(d.block(j), 2.0)}, {"lp", lp_norm(d.block(j), params.p)}});
  }
  const nlohmann::json out{{"blocks", blocks}, {"besov", besov_norm(d, params)}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& out, const std::vector<std::string>& mutations) {
  VerifyOptions opts;
  if (!out.empty()) opts.out_dir = fs::path(out);
  opts.workers = worker_count();
  for (const std::string& m : mutations) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw InvalidInput("--mutate expects NAME=VALUE, got '" + m + "'");
    opts.mutations[m.substr(0, eq)] = parse_exponent(m.substr(eq + 1), "--mutate");
  }
  const SuiteReport report = verify_suite(suite, opts);
  print_verdicts(report.verdicts);
  std::size_t failed = 0;
  for (const Verdict& v : report.verdicts) failed += v.pass ? 0 : 1;
  std::printf("suite %s: %zu checks, %zu failed, %.1f s\n", suite.c_str(), report.verdicts.size(), failed,
              report.wall_seconds);
  return report.pass() ? kOk : kCheckFailed;
}

int cmd_scenarios() {
  for (const BuiltinScenario& b : builtin_scenarios()) std::printf("%-26s %s\n", b.name.c_str(), b.description.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Popowicz system solver and diagnostics"};
  app.require_subcommand(1);

  std::string config, out, input, p_text = "2", r_text = "2", suite;
  double s = 0.0;
  bool plots = false, list = false;
  std::vector<std::string> mutations;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its run directory");
  simulate->add_option("--config", config, "Config JSON path or builtin:NAME")->required();
  simulate->add_option("--out", out, "Output directory")->required();
  simulate->add_flag("--plots", plots, "Also write SVG plots");

  auto* picard = app.add_subcommand("picard", "Run the iterated linear transport scheme");
  picard->add_option("--config", config, "Config JSON path or builtin:NAME")->required();
  picard->add_option("--out", out, "Output directory")->required();

  auto* lp = app.add_subcommand("lp", "Dyadic block norms and the Besov norm of a field CSV");
  lp->add_option("--input", input, "Field CSV (x,value)")->required();
  lp->add_option("-s", s, "Regularity index")->required();
  lp->add_option("-p", p_text, "Integrability exponent, number or inf");
  lp->add_option("-r", r_text, "Summation exponent, number or inf");

  auto* verify = app.add_subcommand("verify", "Run a property suite");
  verify->add_option("--suite", suite, "core, lp, picard, lagrangian or all")->required();
  verify->add_option("--out", out, "Directory for run artifacts and report.json");
  verify->add_option("--mutate", mutations, "NAME=VALUE override injected into every scenario");

  auto* scenarios = app.add_subcommand("scenarios", "Builtin scenarios");
  scenarios->add_flag("--list", list, "List builtin scenarios")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(config, out, plots);
    if (*picard) return cmd_picard(config, out);
    if (*lp) return cmd_lp(input, s, p_text, r_text);
    if (*verify) return cmd_verify(suite, out, mutations);
    if (*scenarios) return cmd_scenarios();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "invalid config:\n");
    for (const std::string& msg : e.errors()) std::fprintf(stderr, "  %s\n", msg.c_str());
    return kUsage;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const SolverAbort& e) {
    std::fprintf(stderr, "solver abort: %s\n", e.what());
    return kAbort;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kAbort;
  }
  return kUsage;
}
