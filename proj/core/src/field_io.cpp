#include "popowicz/field_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace popowicz {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidInput("field CSV line " + std::to_string(line) + ": cannot parse '" + t + "' as a number");
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_field_csv(std::ostream& out, const Field& f) {
  out << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << format_number(f.grid().node(i)) << ',' << format_number(f[i]) << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const Field& f) {
  std::ofstream out = open_out(path);
  write_field_csv(out, f);
}

Field read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,value") throw InvalidInput("field CSV must start with header 'x,value'");
  std::vector<double> xs;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw InvalidInput("field CSV line " + std::to_string(lineno) + ": expected two columns");
    }
    xs.push_back(parse_double(line.substr(0, comma), lineno));
    values.push_back(parse_double(line.substr(comma + 1), lineno));
  }
  if (xs.size() < 2) throw InvalidInput("field CSV has too few rows");
  const double dx = xs[1] - xs[0];
  if (!(dx > 0.0)) throw InvalidInput("field CSV nodes must be increasing");
  if (std::abs(xs[0]) > 1e-12 * dx) throw InvalidInput("field CSV nodes must start at x = 0");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - static_cast<double>(i) * dx) > 1e-9 * dx * static_cast<double>(xs.size())) {
      throw InvalidInput("field CSV nodes are not uniformly spaced (row " + std::to_string(i + 2) + ")");
    }
  }
  const double period = dx * static_cast<double>(xs.size());
  return Field(Grid(xs.size(), period), std::move(values));
}

Field read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_field_csv(in);
}

nlohmann::json field_to_json(const Field& f) {
  nlohmann::json values = nlohmann::json::array();
  for (std::size_t i = 0; i < f.size(); ++i) values.push_back(f[i]);
  return {{"grid", {{"n", f.grid().size()}, {"period", f.grid().period()}}}, {"values", std::move(values)}};
}

Field field_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("grid") || !j.contains("values")) {
    throw InvalidInput("field JSON needs 'grid' and 'values'");
  }
  const auto& g = j.at("grid");
  if (!g.contains("n") || !g.contains("period")) throw InvalidInput("field JSON grid needs 'n' and 'period'");
  const Grid grid(g.at("n").get<std::size_t>(), g.at("period").get<double>());
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != grid.size()) throw InvalidInput("field JSON: values length does not match grid.n");
  return Field(grid, std::move(values));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace popowicz
