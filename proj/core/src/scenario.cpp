#include "popowicz/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "popowicz/field_io.hpp"
#include "popowicz/parallel.hpp"
#include "popowicz/plots.hpp"

namespace popowicz {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string num(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

// Accumulates errors while walking a config; every accessor records a
// message instead of throwing.
class Parser {
 public:
  std::vector<std::string> errors;

  bool object(const json& j, const std::string& where) {
    if (j.is_object()) return true;
    errors.push_back(where + " must be an object");
    return false;
  }

  void only(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) return;
    for (const auto& [key, value] : j.items()) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
      if (!ok) errors.push_back("unknown key '" + qualify(where, key) + "'");
    }
  }

  std::optional<double> number(const json& j, const std::string& where, const char* key, bool required) {
    if (!j.is_object() || !j.contains(key)) {
      if (required) errors.push_back(qualify(where, key) + " is required");
      return std::nullopt;
    }
    const json& v = j.at(key);
    if (!v.is_number()) {
      errors.push_back(qualify(where, key) + " must be a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      errors.push_back(qualify(where, key) + " must be finite");
      return std::nullopt;
    }
    return x;
  }

  // Number or the string "inf".
  std::optional<double> exponent(const json& j, const std::string& where, const char* key) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    const json& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "inf") return kInf;
    if (v.is_number()) return v.get<double>();
    errors.push_back(qualify(where, key) + " must be a number or \"inf\"");
    return std::nullopt;
  }

  std::optional<long long> integer(const json& j, const std::string& where, const char* key, bool required) {
    if (!j.is_object() || !j.contains(key)) {
      if (required) errors.push_back(qualify(where, key) + " is required");
      return std::nullopt;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(qualify(where, key) + " must be an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<std::string> string(const json& j, const std::string& where, const char* key, bool required) {
    if (!j.is_object() || !j.contains(key)) {
      if (required) errors.push_back(qualify(where, key) + " is required");
      return std::nullopt;
    }
    const json& v = j.at(key);
    if (!v.is_string()) {
      errors.push_back(qualify(where, key) + " must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<bool> boolean(const json& j, const std::string& where, const char* key) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
      errors.push_back(qualify(where, key) + " must be true or false");
      return std::nullopt;
    }
    return v.get<bool>();
  }

  static std::string qualify(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
  }
};

ProfileSpec parse_profile(Parser& p, const json& j, const std::string& where, double period) {
  ProfileSpec spec;
  if (!p.object(j, where)) return spec;
  const auto type = p.string(j, where, "type", true);
  if (!type) return spec;
  if (*type == "zero") {
    p.only(j, where, {"type"});
    spec.kind = ProfileKind::zero;
  } else if (*type == "gaussian_momentum") {
    p.only(j, where, {"type", "amplitude", "width", "center", "sign"});
    spec.kind = ProfileKind::gaussian_momentum;
    spec.amplitude = p.number(j, where, "amplitude", true).value_or(0.0);
    spec.width = p.number(j, where, "width", true).value_or(1.0);
    spec.center = p.number(j, where, "center", true).value_or(0.0);
    spec.sign = p.number(j, where, "sign", false).value_or(1.0);
    if (!(spec.width > 0.0)) p.errors.push_back(where + ".width must be positive");
    if (spec.sign != 1.0 && spec.sign != -1.0) p.errors.push_back(where + ".sign must be 1 or -1");
  } else if (*type == "peakon") {
    p.only(j, where, {"type", "c", "center", "mollify_passes"});
    spec.kind = ProfileKind::peakon;
    spec.c = p.number(j, where, "c", true).value_or(0.0);
    spec.center = p.number(j, where, "center", false).value_or(0.25 * period);
    spec.mollify_passes = static_cast<int>(p.integer(j, where, "mollify_passes", false).value_or(0));
    if (spec.mollify_passes < 0) p.errors.push_back(where + ".mollify_passes must be >= 0");
  } else if (*type == "odd_bump") {
    p.only(j, where, {"type", "amplitude", "width"});
    spec.kind = ProfileKind::odd_bump;
    spec.amplitude = p.number(j, where, "amplitude", true).value_or(0.0);
    spec.width = p.number(j, where, "width", true).value_or(1.0);
    if (!(spec.width > 0.0)) p.errors.push_back(where + ".width must be positive");
  } else if (*type == "fourier_modes") {
    p.only(j, where, {"type", "modes"});
    spec.kind = ProfileKind::fourier_modes;
    if (!j.contains("modes") || !j.at("modes").is_array()) {
      p.errors.push_back(where + ".modes must be a list");
    } else {
      std::size_t i = 0;
      for (const json& m : j.at("modes")) {
        const std::string w = where + ".modes[" + std::to_string(i++) + "]";
        if (!p.object(m, w)) continue;
        p.only(m, w, {"k", "amp", "phase"});
        FourierMode mode;
        mode.k = static_cast<int>(p.integer(m, w, "k", true).value_or(0));
        mode.amp = p.number(m, w, "amp", true).value_or(0.0);
        mode.phase = p.number(m, w, "phase", false).value_or(0.0);
        if (mode.k < 0) p.errors.push_back(w + ".k must be >= 0");
        spec.modes.push_back(mode);
      }
    }
  } else {
    p.errors.push_back(where + ".type '" + *type +
                       "' is not one of zero, gaussian_momentum, peakon, odd_bump, fourier_modes");
  }
  return spec;
}

InitialData parse_initial(Parser& p, const json& j, const std::string& where, double period) {
  InitialData data;
  if (!p.object(j, where)) return data;
  const std::string space = p.string(j, where, "space", true).value_or("velocity");
  const char* a = "u";
  const char* b = "v";
  if (space == "velocity") {
    data.space = DataSpace::velocity;
  } else if (space == "momentum") {
    data.space = DataSpace::momentum;
    a = "m";
    b = "n";
  } else {
    p.errors.push_back(where + ".space must be \"velocity\" or \"momentum\"");
  }
  p.only(j, where, {"space", a, b});
  if (j.contains(a)) {
    data.first = parse_profile(p, j.at(a), Parser::qualify(where, a), period);
  } else {
    p.errors.push_back(Parser::qualify(where, a) + " is required");
  }
  if (j.contains(b)) {
    data.second = parse_profile(p, j.at(b), Parser::qualify(where, b), period);
  } else {
    p.errors.push_back(Parser::qualify(where, b) + " is required");
  }
  for (const ProfileSpec* spec : {&data.first, &data.second}) {
    if (spec->kind == ProfileKind::peakon && data.space == DataSpace::momentum) {
      p.errors.push_back(where + ": a peakon is a velocity profile; use space \"velocity\"");
    }
  }
  return data;
}

double periodic_distance(double x, double center, double period) {
  double d = std::fmod(x - center, period);
  if (d < 0.0) d += period;
  return std::min(d, period - d);
}

Field smooth_121(const Field& f) {
  Field out = f;
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.25 * f[(i + n - 1) % n] + 0.5 * f[i] + 0.25 * f[(i + 1) % n];
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : InvalidInput("invalid config: " + join(errors, "; ")), errors_(std::move(errors)) {}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"conservation",  "momentum_rate", "sign",         "l1_bound",
                                              "blowup_bound",  "growth_bound",  "pushforward",  "odd_symmetry",
                                              "peakon_speed",  "peakon_shape",  "reduction",    "continuous_dependence"};
  return names;
}

ScenarioConfig parse_config(const json& j) {
  Parser p;
  ScenarioConfig cfg;
  cfg.source = j;
  if (!p.object(j, "config")) throw ConfigError(p.errors);
  p.only(j, "", {"name", "description", "grid", "solver", "initial_data", "diagnostics", "besov", "seed",
                 "peakon_check", "growth_constant", "pushforward_exponents", "l1_rates", "dependence", "picard",
                 "csv_stride"});

  cfg.name = p.string(j, "", "name", true).value_or("");
  cfg.description = p.string(j, "", "description", false).value_or("");

  bool grid_ok = false;
  if (j.contains("grid") && p.object(j.at("grid"), "grid")) {
    const json& g = j.at("grid");
    p.only(g, "grid", {"n_points", "period"});
    const auto n = p.integer(g, "grid", "n_points", true);
    const auto period = p.number(g, "grid", "period", true);
    if (n && period) {
      try {
        if (*n <= 0) throw InvalidInput("grid.n_points must be positive");
        cfg.grid = Grid(static_cast<std::size_t>(*n), *period);
        grid_ok = true;
      } catch (const InvalidInput& e) {
        p.errors.push_back(e.what());
      }
    }
  } else if (!j.contains("grid")) {
    p.errors.push_back("grid is required");
  }

  if (j.contains("solver") && p.object(j.at("solver"), "solver")) {
    const json& s = j.at("solver");
    p.only(s, "solver", {"dt", "t_end", "dealias_fraction", "snapshot_stride", "safety_checks"});
    cfg.solver.dt = p.number(s, "solver", "dt", true).value_or(0.0);
    cfg.solver.t_end = p.number(s, "solver", "t_end", true).value_or(0.0);
    cfg.solver.dealias_fraction = p.number(s, "solver", "dealias_fraction", false).value_or(kDefaultDealiasFraction);
    const long long stride = p.integer(s, "solver", "snapshot_stride", false).value_or(10);
    if (stride < 1) p.errors.push_back("solver.snapshot_stride must be >= 1");
    cfg.solver.snapshot_stride = static_cast<std::size_t>(std::max(1LL, stride));
    cfg.solver.safety_checks = p.boolean(s, "solver", "safety_checks").value_or(false);
    if (s.contains("dt") && s.contains("t_end")) {
      try {
        cfg.solver.validate();
      } catch (const InvalidInput& e) {
        p.errors.push_back(e.what());
      }
    }
  } else if (!j.contains("solver")) {
    p.errors.push_back("solver is required");
  }

  const double period = grid_ok ? cfg.grid.period() : 1.0;
  if (j.contains("initial_data")) {
    cfg.initial = parse_initial(p, j.at("initial_data"), "initial_data", period);
  } else {
    p.errors.push_back("initial_data is required");
  }

  if (j.contains("diagnostics")) {
    const json& d = j.at("diagnostics");
    if (!d.is_array()) {
      p.errors.push_back("diagnostics must be a list of check names");
    } else {
      for (const json& name : d) {
        if (!name.is_string()) {
          p.errors.push_back("diagnostics entries must be strings");
          continue;
        }
        const std::string s = name.get<std::string>();
        const auto& known = known_checks();
        if (std::find(known.begin(), known.end(), s) == known.end()) {
          p.errors.push_back("diagnostics: unknown check '" + s + "' (known: " + join(known, ", ") + ")");
        } else {
          cfg.checks.push_back(s);
        }
      }
    }
  }

  if (j.contains("besov") && p.object(j.at("besov"), "besov")) {
    const json& b = j.at("besov");
    p.only(b, "besov", {"s", "p", "r"});
    cfg.besov.s = p.number(b, "besov", "s", true).value_or(cfg.besov.s);
    cfg.besov.p = p.exponent(b, "besov", "p").value_or(2.0);
    cfg.besov.r = p.exponent(b, "besov", "r").value_or(2.0);
    try {
      cfg.besov.validate();
    } catch (const InvalidInput& e) {
      p.errors.push_back(std::string("besov: ") + e.what());
    }
  }
  if (const auto seed = p.integer(j, "", "seed", false)) {
    if (*seed < 0) p.errors.push_back("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(std::max(0LL, *seed));
  }
  if (j.contains("csv_stride")) {
    const long long cs = p.integer(j, "", "csv_stride", false).value_or(1);
    if (cs < 1) p.errors.push_back("csv_stride must be >= 1");
  }

  if (j.contains("peakon_check") && p.object(j.at("peakon_check"), "peakon_check")) {
    const json& pc = j.at("peakon_check");
    p.only(pc, "peakon_check", {"channel", "expected_speed", "speed_tolerance", "shape_tolerance"});
    PeakonCheckSpec spec;
    spec.channel = p.string(pc, "peakon_check", "channel", true).value_or("v");
    if (spec.channel != "u" && spec.channel != "v") p.errors.push_back("peakon_check.channel must be \"u\" or \"v\"");
    spec.expected_speed = p.number(pc, "peakon_check", "expected_speed", true).value_or(1.0);
    spec.speed_tolerance = p.number(pc, "peakon_check", "speed_tolerance", false).value_or(0.01);
    spec.shape_tolerance = p.number(pc, "peakon_check", "shape_tolerance", false).value_or(0.03);
    cfg.peakon = spec;
  }
  cfg.growth_constant = p.number(j, "", "growth_constant", false);

  if (j.contains("pushforward_exponents") && p.object(j.at("pushforward_exponents"), "pushforward_exponents")) {
    const json& e = j.at("pushforward_exponents");
    p.only(e, "pushforward_exponents", {"m", "n"});
    cfg.pushforward_exponents.m = p.number(e, "pushforward_exponents", "m", false).value_or(3.0);
    cfg.pushforward_exponents.n = p.number(e, "pushforward_exponents", "n", false).value_or(2.0);
  }
  if (j.contains("l1_rates") && p.object(j.at("l1_rates"), "l1_rates")) {
    const json& e = j.at("l1_rates");
    p.only(e, "l1_rates", {"m", "n"});
    cfg.l1_rates.m_rate = p.number(e, "l1_rates", "m", false).value_or(4.0);
    cfg.l1_rates.n_rate = p.number(e, "l1_rates", "n", false).value_or(2.0);
  }

  if (j.contains("dependence") && p.object(j.at("dependence"), "dependence")) {
    const json& d = j.at("dependence");
    p.only(d, "dependence", {"scales", "perturbation", "t_end"});
    DependenceSpec spec;
    if (!d.contains("scales") || !d.at("scales").is_array() || d.at("scales").empty()) {
      p.errors.push_back("dependence.scales must be a nonempty list");
    } else {
      for (const json& s : d.at("scales")) {
        if (!s.is_number() || !(s.get<double>() >= 0.0)) {
          p.errors.push_back("dependence.scales entries must be nonnegative numbers");
          continue;
        }
        spec.scales.push_back(s.get<double>());
      }
      for (std::size_t i = 1; i < spec.scales.size(); ++i) {
        if (!(spec.scales[i] < spec.scales[i - 1])) p.errors.push_back("dependence.scales must be decreasing");
      }
    }
    if (d.contains("perturbation")) {
      spec.perturbation = parse_initial(p, d.at("perturbation"), "dependence.perturbation", period);
    } else {
      p.errors.push_back("dependence.perturbation is required");
    }
    spec.t_end = p.number(d, "dependence", "t_end", false).value_or(cfg.solver.t_end);
    if (!(spec.t_end > 0.0)) p.errors.push_back("dependence.t_end must be positive");
    cfg.dependence = spec;
  }

  if (j.contains("picard") && p.object(j.at("picard"), "picard")) {
    const json& pc = j.at("picard");
    p.only(pc, "picard", {"max_iter", "T_frac", "dt", "horizon", "max_horizon", "tolerance", "fitted_C", "calibrate",
                          "calibration_runs", "start_from_data"});
    PicardSpec spec;
    IterationConfig& it = spec.iteration;
    it.max_iter = static_cast<std::size_t>(std::max(0LL, p.integer(pc, "picard", "max_iter", false).value_or(30)));
    it.T_frac = p.number(pc, "picard", "T_frac", false).value_or(0.5);
    it.dt = p.number(pc, "picard", "dt", false).value_or(0.0);
    it.horizon = p.number(pc, "picard", "horizon", false).value_or(0.0);
    it.max_horizon = p.number(pc, "picard", "max_horizon", false).value_or(1.0);
    it.tolerance = p.number(pc, "picard", "tolerance", false).value_or(1e-10);
    it.fitted_C = p.number(pc, "picard", "fitted_C", false).value_or(0.0);
    it.start_from_data = p.boolean(pc, "picard", "start_from_data").value_or(false);
    it.dealias_fraction = cfg.solver.dealias_fraction;
    it.besov = cfg.besov;
    spec.calibrate = p.boolean(pc, "picard", "calibrate").value_or(false);
    const long long runs = p.integer(pc, "picard", "calibration_runs", false).value_or(20);
    if (runs < 1) p.errors.push_back("picard.calibration_runs must be >= 1");
    spec.calibration_runs = static_cast<std::size_t>(std::max(1LL, runs));
    if (!pc.contains("fitted_C") && !spec.calibrate) {
      p.errors.push_back("picard needs either fitted_C or calibrate: true");
    }
    try {
      it.validate();
    } catch (const InvalidInput& e) {
      p.errors.push_back(e.what());
    }
    cfg.picard = spec;
  }

  auto has = [&](const char* name) { return std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end(); };
  if ((has("peakon_speed") || has("peakon_shape")) && !cfg.peakon) {
    p.errors.push_back("peakon checks need a peakon_check section");
  }
  if (has("growth_bound") && !cfg.growth_constant) p.errors.push_back("growth_bound needs growth_constant");
  if (has("continuous_dependence") && !cfg.dependence) {
    p.errors.push_back("continuous_dependence needs a dependence section");
  }

  if (p.errors.empty()) {
    try {
      const State s = build_initial_state(cfg.initial, cfg.grid, cfg.solver.dealias_fraction);
      cfg.solver.validate_for(s);
      if (has("odd_symmetry")) require_odd_data(momentum(s), 0.5 * cfg.grid.period());
    } catch (const InvalidInput& e) {
      p.errors.push_back(e.what());
    }
  }
  if (!p.errors.empty()) throw ConfigError(p.errors);
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

Field sample_profile(const ProfileSpec& spec, const Grid& grid) {
  const double L = grid.period();
  const std::size_t n = grid.size();
  switch (spec.kind) {
    case ProfileKind::zero:
      return Field::zeros(grid);
    case ProfileKind::gaussian_momentum:
      return Field::sample(grid, [&](double x) {
        double sum = 0.0;
        for (int k = -3; k <= 3; ++k) {
          const double y = (x - spec.center + k * L) / spec.width;
          sum += std::exp(-y * y);
        }
        return spec.sign * spec.amplitude * sum;
      });
    case ProfileKind::peakon: {
      Field f = Field::sample(grid, [&](double x) { return spec.c * std::exp(-periodic_distance(x, spec.center, L)); });
      for (int i = 0; i < spec.mollify_passes; ++i) f = smooth_121(f);
      return f;
    }
    case ProfileKind::odd_bump: {
      // Offsets from the box center computed from integers, so the samples
      // are odd to the last bit.
      Field f = Field::zeros(grid);
      const long half = static_cast<long>(n / 2);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = static_cast<double>(static_cast<long>(i) - half) * grid.spacing();
        double sum = 0.0;
        for (int k = 1; k <= 3; ++k) {
          const double a = (y + k * L) / spec.width;
          const double b = (y - k * L) / spec.width;
          sum += (y + k * L) * std::exp(-a * a) + (y - k * L) * std::exp(-b * b);
        }
        const double c = y / spec.width;
        f[i] = spec.amplitude * (y * std::exp(-c * c) + sum);
      }
      return f;
    }
    case ProfileKind::fourier_modes:
      return Field::sample(grid, [&](double x) {
        double sum = 0.0;
        for (const FourierMode& m : spec.modes) sum += m.amp * std::cos(2.0 * std::numbers::pi * m.k * x / L + m.phase);
        return sum;
      });
  }
  return Field::zeros(grid);
}

State build_initial_state(const InitialData& data, const Grid& grid, double dealias_fraction) {
  Field a = sample_profile(data.first, grid);
  Field b = sample_profile(data.second, grid);
  State s{std::move(a), std::move(b), 0.0};
  if (data.space == DataSpace::momentum) s = velocity(MomentumState{s.u, s.v, 0.0});
  s.u = dealias(s.u, dealias_fraction);
  s.v = dealias(s.v, dealias_fraction);
  return s;
}

namespace {

json gaussian(double amplitude, double width, double center) {
  return {{"type", "gaussian_momentum"}, {"amplitude", amplitude}, {"width", width}, {"center", center}};
}

std::vector<BuiltinScenario> make_builtins() {
  std::vector<BuiltinScenario> out;
  out.push_back({"thm43_positive_momentum",
                 "Nonnegative Gaussian momenta; conservation, sign, L1 bounds and pushforward to t = 5",
                 json{{"name", "thm43_positive_momentum"},
                      {"grid", {{"n_points", 512}, {"period", 40.0}}},
                      {"solver", {{"dt", 0.0390625}, {"t_end", 5.0}, {"snapshot_stride", 1}}},
                      {"initial_data",
                       {{"space", "momentum"}, {"m", gaussian(0.15, 2.0, 15.0)}, {"n", gaussian(0.09, 3.0, 25.0)}}},
                      {"diagnostics",
                       {"conservation", "momentum_rate", "sign", "l1_bound", "blowup_bound", "pushforward",
                        "growth_bound"}},
                      {"besov", {{"s", 2.6}, {"p", 2}, {"r", 2}}},
                      {"growth_constant", 0.2905},
                      {"csv_stride", 8}}});
  out.push_back({"lagrangian_pushforward",
                 "Pushforward invariants m q_x^3 and n q_x^2 at N = 1024 over t in [0, 2]",
                 json{{"name", "lagrangian_pushforward"},
                      {"grid", {{"n_points", 1024}, {"period", 40.0}}},
                      {"solver", {{"dt", 0.01953125}, {"t_end", 2.0}, {"snapshot_stride", 4}}},
                      {"initial_data",
                       {{"space", "momentum"}, {"m", gaussian(0.25, 2.0, 15.0)}, {"n", gaussian(0.15, 3.0, 25.0)}}},
                      {"diagnostics", {"conservation", "sign", "pushforward"}},
                      {"csv_stride", 8}}});
  out.push_back({"ch_reduction_peakon",
                 "u = m = 0 with a mollified peakon in v; one box transit at speed c = 1",
                 json{{"name", "ch_reduction_peakon"},
                      {"grid", {{"n_points", 4096}, {"period", 56.0}}},
                      {"solver", {{"dt", 0.0068359375}, {"t_end", 56.0}, {"snapshot_stride", 128}}},
                      {"initial_data",
                       {{"space", "velocity"},
                        {"u", {{"type", "zero"}}},
                        {"v", {{"type", "peakon"}, {"c", 1.0}, {"center", 14.0}, {"mollify_passes", 0}}}}},
                      {"diagnostics", {"peakon_speed", "peakon_shape", "conservation", "reduction"}},
                      {"peakon_check", {{"channel", "v"}, {"expected_speed", 1.0}}},
                      {"csv_stride", 8}}});
  out.push_back({"dp_reduction_peakon",
                 "v = n = 0 with a mollified peakon in u; travels at 2c in system time",
                 json{{"name", "dp_reduction_peakon"},
                      {"grid", {{"n_points", 4096}, {"period", 56.0}}},
                      {"solver", {{"dt", 0.00341796875}, {"t_end", 28.0}, {"snapshot_stride", 128}}},
                      {"initial_data",
                       {{"space", "velocity"},
                        {"u", {{"type", "peakon"}, {"c", 1.0}, {"center", 14.0}, {"mollify_passes", 0}}},
                        {"v", {{"type", "zero"}}}}},
                      {"diagnostics", {"peakon_speed", "peakon_shape", "conservation", "reduction"}},
                      {"peakon_check", {{"channel", "u"}, {"expected_speed", 2.0}}},
                      {"csv_stride", 8}}});
  out.push_back({"thm44_odd_data",
                 "Odd momenta, negative left of the center and positive right of it, to t = 3",
                 json{{"name", "thm44_odd_data"},
                      {"grid", {{"n_points", 1024}, {"period", 40.0}}},
                      {"solver", {{"dt", 0.01953125}, {"t_end", 3.0}, {"snapshot_stride", 1}}},
                      {"initial_data",
                       {{"space", "momentum"},
                        {"m", {{"type", "odd_bump"}, {"amplitude", 1.0}, {"width", 1.0}}},
                        {"n", {{"type", "odd_bump"}, {"amplitude", 0.5}, {"width", 1.0}}}}},
                      {"diagnostics", {"odd_symmetry", "conservation"}},
                      {"csv_stride", 16}}});
  out.push_back({"continuous_dependence",
                 "Perturbed smooth data at eps = 1e-2, 1e-3, 1e-4; log-log slope of the B^{s-1} distance",
                 json{{"name", "continuous_dependence"},
                      {"grid", {{"n_points", 256}, {"period", 6.283185307179586}}},
                      {"solver", {{"dt", 0.01}, {"t_end", 1.0}, {"snapshot_stride", 5}}},
                      {"initial_data",
                       {{"space", "velocity"}, {"u", gaussian(0.1, 1.0, 2.0)}, {"v", gaussian(0.05, 0.8, 4.0)}}},
                      {"diagnostics", {"conservation", "continuous_dependence"}},
                      {"besov", {{"s", 2.6}, {"p", 2}, {"r", 2}}},
                      {"dependence",
                       {{"scales", {1e-2, 1e-3, 1e-4}},
                        {"t_end", 1.0},
                        {"perturbation",
                         {{"space", "velocity"},
                          {"u", {{"type", "fourier_modes"}, {"modes", {{{"k", 1}, {"amp", 1.0}}, {{"k", 3}, {"amp", 0.3}, {"phase", 0.5}}}}}},
                          {"v", {{"type", "fourier_modes"}, {"modes", {{{"k", 2}, {"amp", 0.5}, {"phase", 1.0}}}}}}}}}},
                      {"csv_stride", 4}}});
  out.push_back({"picard_smooth",
                 "Iterated linear transport from truncated smooth data on a 2 pi box (use with the picard command)",
                 json{{"name", "picard_smooth"},
                      {"grid", {{"n_points", 512}, {"period", 6.283185307179586}}},
                      {"solver", {{"dt", 0.006}, {"t_end", 1.0}, {"snapshot_stride", 1}}},
                      {"initial_data",
                       {{"space", "velocity"}, {"u", gaussian(0.1, 1.0, 2.0)}, {"v", gaussian(0.05, 0.8, 4.0)}}},
                      {"besov", {{"s", 2.6}, {"p", 2}, {"r", 2}}},
                      {"seed", 7},
                      {"picard", {{"max_iter", 30}, {"T_frac", 0.5}, {"max_horizon", 1.0}, {"calibrate", true},
                                  {"calibration_runs", 20}}}}});
  out.push_back({"l1_rate_probe",
                 "Small m bump on the compressive flank of n; int m grows, so a weakened L1 rate is caught",
                 json{{"name", "l1_rate_probe"},
                      {"grid", {{"n_points", 1024}, {"period", 40.0}}},
                      {"solver", {{"dt", 0.01}, {"t_end", 5.0}, {"snapshot_stride", 5}}},
                      {"initial_data",
                       {{"space", "momentum"}, {"m", gaussian(0.01, 0.8, 21.0)}, {"n", gaussian(0.3, 1.0, 20.0)}}},
                      {"diagnostics", {"conservation", "sign", "l1_bound"}},
                      {"csv_stride", 10}}});
  out.push_back({"sign_changing_watch",
                 "Sign-changing momentum; the blow-up functional is monitored, not asserted",
                 json{{"name", "sign_changing_watch"},
                      {"grid", {{"n_points", 512}, {"period", 40.0}}},
                      {"solver", {{"dt", 0.02}, {"t_end", 4.0}, {"snapshot_stride", 5}}},
                      {"initial_data",
                       {{"space", "momentum"},
                        {"m", {{"type", "fourier_modes"}, {"modes", {{{"k", 2}, {"amp", 0.1}}, {{"k", 5}, {"amp", 0.03}, {"phase", 0.7}}}}}},
                        {"n", gaussian(0.1, 2.0, 20.0)}}},
                      {"diagnostics", {"conservation"}},
                      {"csv_stride", 4}}});
  return out;
}

}  // namespace

const std::vector<BuiltinScenario>& builtin_scenarios() {
  static const std::vector<BuiltinScenario> all = make_builtins();
  return all;
}

std::optional<json> builtin_config(const std::string& name) {
  for (const BuiltinScenario& b : builtin_scenarios()) {
    if (b.name == name) return std::optional<json>(std::in_place, b.config);
  }
  return std::nullopt;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  return {{"steps", s.steps},
          {"t_final", s.t_final},
          {"abort_reason", s.abort_reason ? json(*s.abort_reason) : json(nullptr)},
          {"conserved_drift", s.conserved_drift}};
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  auto has = [&](const char* name) {
    return std::find(config.checks.begin(), config.checks.end(), name) != config.checks.end();
  };
  const Grid& grid = config.grid;
  const State initial = build_initial_state(config.initial, grid, config.solver.dealias_fraction);

  RecorderOptions ropts;
  ropts.half_line_center = 0.5 * grid.period();
  if (has("growth_bound")) ropts.besov = config.besov;
  DiagnosticsRecorder recorder(grid, ropts);

  const bool track = has("pushforward");
  FlowState flow{initial, CharacteristicMap::identity(grid)};
  std::vector<CharacteristicMap> maps;
  std::vector<Observer> observers{recorder.observer()};
  Stepper stepper;
  if (track) {
    observers.push_back(Observer{"characteristics", [&](const State& s, std::size_t) {
                                   maps.push_back(flow.map);
                                   maps.back().time = s.time;
                                 }});
    stepper = [&](const State& s, double h) {
      flow.state = s;
      flow = advance_with_characteristics(flow, h, config.solver.dealias_fraction);
      return flow.state;
    };
  }

  ScenarioResult result([&] {
    try {
      return simulate(initial, config.solver, observers, stepper);
    } catch (const SolverAbort& e) {
      return RunSummary{initial, 0, e.time(), std::string(e.what()), std::nullopt, 0.0};
    }
  }());
  result.record = recorder.data();
  const DiagnosticsRecord& r = result.record;
  std::vector<Verdict>& out = result.verdicts;

  Verdict completed{"run_completed", result.summary.completed(), result.summary.t_final, config.solver.t_end, {}};
  if (result.summary.abort_reason) completed.detail = *result.summary.abort_reason;
  out.push_back(completed);

  for (const std::string& check : config.checks) {
    if (check == "conservation") {
      out.push_back(conservation_check(r));
    } else if (check == "momentum_rate") {
      out.push_back(momentum_rate_check(r));
    } else if (check == "sign") {
      out.push_back(sign_preservation_check(r));
    } else if (check == "l1_bound") {
      out.push_back(l1_bound_check(r, config.l1_rates));
    } else if (check == "blowup_bound") {
      out.push_back(blowup_integrand_bound_check(r));
    } else if (check == "growth_bound") {
      out.push_back(growth_bound_check(r, *config.growth_constant));
    } else if (check == "pushforward") {
      const std::size_t n = std::min(maps.size(), r.momenta.size());
      out.push_back(pushforward_check(std::span(maps).first(n), std::span(r.momenta).first(n),
                                      config.pushforward_exponents));
    } else if (check == "odd_symmetry") {
      OddSymmetryOptions o;
      o.center = 0.5 * grid.period();
      for (Verdict& v : odd_symmetry_check(r, o)) out.push_back(std::move(v));
    } else if (check == "peakon_speed" || check == "peakon_shape") {
      const PeakonCheckSpec& pk = *config.peakon;
      std::vector<Field> profiles;
      for (const State& s : r.states) profiles.push_back(pk.channel == "u" ? s.u : s.v);
      if (profiles.size() < 2) {
        out.push_back(Verdict{check, false, 0.0, 0.0, "fewer than two snapshots"});
        continue;
      }
      const TravelReport tr = traveling_wave_report(r.times, profiles);
      if (check == "peakon_speed") {
        const double err = std::abs(tr.speed - pk.expected_speed) / std::abs(pk.expected_speed);
        out.push_back(Verdict{check, err <= pk.speed_tolerance, err, pk.speed_tolerance,
                              "measured speed " + num(tr.speed) + ", expected " + num(pk.expected_speed)});
      } else {
        out.push_back(Verdict{check, tr.shape_deviation <= pk.shape_tolerance, tr.shape_deviation, pk.shape_tolerance,
                              "relative L2 deviation after aligning crests"});
      }
    } else if (check == "reduction") {
      Verdict v{"reduction", true, 0.0, 1e-10, {}};
      const bool u_zero = initial.u.max_abs() == 0.0;
      const bool v_zero = initial.v.max_abs() == 0.0;
      for (const State& s : r.states) {
        if (u_zero) v.worst_value = std::max(v.worst_value, s.u.max_abs());
        if (v_zero) v.worst_value = std::max(v.worst_value, s.v.max_abs());
      }
      v.pass = v.worst_value <= v.tolerance;
      v.detail = u_zero ? "u stays zero" : (v_zero ? "v stays zero" : "no zero channel");
      out.push_back(v);
    } else if (check == "continuous_dependence") {
      const DependenceSpec& dep = *config.dependence;
      const State delta = build_initial_state(dep.perturbation, grid, config.solver.dealias_fraction);
      DependenceOptions dopts;
      dopts.solver = config.solver;
      dopts.solver.t_end = dep.t_end;
      dopts.besov = config.besov;
      dopts.workers = options.workers;
      const DyadicCutoffs cutoffs(grid);
      DependenceReport rep = continuous_dependence_experiment(initial, delta, dep.scales, dopts, cutoffs);
      Verdict v{"continuous_dependence_slope", false, rep.slope.value_or(0.0), 0.1, {}};
      v.pass = rep.slope && !rep.partial && std::abs(*rep.slope - 1.0) <= 0.1;
      v.detail = "slope of log D(eps) vs log eps must lie in [0.9, 1.1]; D/(eps |delta|) <= " + num(rep.amplification);
      if (rep.partial) v.detail += "; some member runs aborted";
      out.push_back(v);
      result.dependence = std::move(rep);
    }
  }
  result.maps = std::move(maps);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (options.out_dir) {
    write_run_artifact(*options.out_dir, config, result);
    if (options.plots) emit_plots(*options.out_dir);
  }
  return result;
}

void write_run_artifact(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result) {
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", config.source);
  write_json(dir / "summary.json", summary_to_json(result.summary));
  write_json(dir / "verdicts.json", verdicts_to_json(result.verdicts));
  write_diagnostics_csv(dir / "diagnostics.csv", result.record);

  std::size_t csv_stride = 1;
  if (config.source.contains("csv_stride")) csv_stride = config.source.at("csv_stride").get<std::size_t>();
  std::ofstream snap(dir / "snapshots.csv");
  if (!snap) throw std::runtime_error("cannot write " + (dir / "snapshots.csv").string());
  snap << "t,x,u,v,m,n\n";
  const DiagnosticsRecord& r = result.record;
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    if (k % csv_stride != 0 && k + 1 != r.states.size()) continue;
    const State& s = r.states[k];
    const MomentumState& ms = r.momenta[k];
    const std::string t = format_number(s.time);
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      snap << t << ',' << format_number(s.grid().node(i)) << ',' << format_number(s.u[i]) << ','
           << format_number(s.v[i]) << ',' << format_number(ms.m[i]) << ',' << format_number(ms.n[i]) << '\n';
    }
  }
}

double calibrate_growth_constant(const ScenarioConfig& base, std::uint64_t seed, std::size_t runs,
                                 std::size_t workers) {
  const double L = base.grid.period();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.05, 0.2), width(1.5, 3.5), center(0.2 * L, 0.8 * L);
  std::vector<ScenarioConfig> members;
  for (std::size_t i = 0; i < runs; ++i) {
    ScenarioConfig cfg = base;
    cfg.initial.space = DataSpace::momentum;
    for (ProfileSpec* p : {&cfg.initial.first, &cfg.initial.second}) {
      *p = ProfileSpec{};
      p->kind = ProfileKind::gaussian_momentum;
      p->amplitude = amp(rng);
      p->width = width(rng);
      p->center = center(rng);
    }
    cfg.checks = {"growth_bound"};
    cfg.growth_constant = 1.0;
    members.push_back(std::move(cfg));
  }
  std::vector<std::optional<DiagnosticsRecord>> records(runs);
  parallel_for(runs, workers, [&](std::size_t i) { records[i] = run_scenario(members[i]).record; });
  std::vector<const DiagnosticsRecord*> ptrs;
  for (const auto& r : records) ptrs.push_back(&*r);
  return fit_growth_constant(ptrs);
}

State random_smooth_state(const Grid& grid, std::uint64_t seed, double amp_lo, double amp_hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(amp_lo, amp_hi);
  std::uniform_real_distribution<double> conc(1.0, 3.0);
  std::uniform_real_distribution<double> where(0.0, 1.0);
  const double L = grid.period();
  auto channel = [&] {
    const double a1 = amp(rng), k1 = conc(rng), x1 = where(rng) * L;
    const double a2 = amp(rng), k2 = conc(rng), x2 = where(rng) * L;
    const double w = 2.0 * std::numbers::pi / L;
    return Field::sample(grid, [=](double x) {
      return a1 * std::exp(k1 * (std::cos(w * (x - x1)) - 1.0)) + 0.5 * a2 * std::exp(k2 * (std::cos(w * (x - x2)) - 1.0));
    });
  };
  Field u = channel();
  Field v = channel();
  return State{dealias(u, kDefaultDealiasFraction), dealias(v, kDefaultDealiasFraction), 0.0};
}

double calibrate_picard_constant(const Grid& grid, const IterationConfig& base, std::uint64_t seed, std::size_t runs,
                                 std::size_t workers) {
  IterationConfig cfg = base;
  cfg.horizon = base.horizon > 0.0 ? base.horizon : base.max_horizon;
  const DyadicCutoffs cutoffs(grid);
  std::vector<IterateTrace> traces(runs);
  parallel_for(runs, workers, [&](std::size_t i) {
    const State s = random_smooth_state(grid, seed + 7919 * (i + 1), 0.02, 0.15);
    traces[i] = run_iteration(s.u, s.v, cfg, cutoffs).trace;
  });
  return fit_uniform_bound_constant(traces);
}

PicardRun run_picard(const ScenarioConfig& config, std::size_t workers) {
  if (!config.picard) throw InvalidInput("config has no picard section");
  const PicardSpec& spec = *config.picard;
  const Grid& grid = config.grid;
  const DyadicCutoffs cutoffs(grid);
  const State initial = build_initial_state(config.initial, grid, config.solver.dealias_fraction);

  PicardRun out{IterationResult{IterateTrace{}, Trajectory(grid, 1.0)}, 0.0, 0.0, {}, 0, {}};
  IterationConfig it = spec.iteration;
  out.fitted_C = spec.calibrate ? calibrate_picard_constant(grid, it, config.seed, spec.calibration_runs, workers)
                                : it.fitted_C;
  it.fitted_C = out.fitted_C;
  out.result = run_iteration(initial.u, initial.v, it, cutoffs);
  const IterateTrace& trace = out.result.trace;
  out.ramp_end = truncation_ramp_end(initial.u, initial.v, it.besov, cutoffs);
  out.ratios = contraction_ratios(trace, out.ramp_end, it.tolerance);
  out.bound = uniform_bound_check(trace, out.fitted_C);

  if (!trace.abort_reason && trace.times.size() >= 2) {
    SolverConfig sc = config.solver;
    sc.dt = trace.times[1] - trace.times[0];
    sc.t_end = trace.horizon;
    sc.snapshot_stride = 1;
    std::vector<State> path;
    const Observer keep{"path", [&](const State& s, std::size_t) { path.push_back(s); }};
    const RunSummary summary = simulate(initial, sc, std::span(&keep, 1));
    if (summary.abort_reason) {
      out.nonlinear_distance = std::numeric_limits<double>::infinity();
    } else {
      const BesovParams lo = it.besov.shifted(-1.0);
      const Trajectory& fin = out.result.final_iterate;
      const std::size_t n = std::min(path.size(), fin.size());
      for (std::size_t i = 0; i < n; ++i) {
        const State& a = fin.state(i);
        out.nonlinear_distance = std::max(out.nonlinear_distance, besov_norm(a.u - path[i].u, lo, cutoffs) +
                                                                      besov_norm(a.v - path[i].v, lo, cutoffs));
      }
    }
  }
  return out;
}

void write_picard_artifact(const std::filesystem::path& dir, const ScenarioConfig& config, const PicardRun& run) {
  std::filesystem::create_directories(dir);
  write_json(dir / "config.json", config.source);
  std::ofstream trace(dir / "trace.csv");
  if (!trace) throw std::runtime_error("cannot write " + (dir / "trace.csv").string());
  trace << "n,sup_norm_u,sup_norm_v,diff_u,diff_v\n";
  for (const IterateRecord& r : run.result.trace.records) {
    trace << r.n << ',' << format_number(r.sup_norm_u) << ',' << format_number(r.sup_norm_v) << ','
          << format_number(r.diff_u) << ',' << format_number(r.diff_v) << '\n';
  }
  const IterateTrace& t = run.result.trace;
  double worst_ratio = 0.0;
  for (double r : run.ratios) worst_ratio = std::max(worst_ratio, r);
  json summary{{"converged", t.converged},
               {"iterations", t.records.size()},
               {"final_gap", t.final_gap()},
               {"fitted_C", run.fitted_C},
               {"diverged", t.diverged},
               {"horizon", t.horizon},
               {"data_norm", t.data_norm},
               {"ramp_end", run.ramp_end},
               {"worst_contraction_ratio", worst_ratio},
               {"nonlinear_distance", run.nonlinear_distance},
               {"uniform_bound_pass", run.bound.pass},
               {"uniform_bound_worst_ratio", run.bound.worst_ratio},
               {"abort_reason", t.abort_reason ? json(*t.abort_reason) : json(nullptr)}};
  write_json(dir / "summary.json", summary);
}

}  // namespace popowicz
