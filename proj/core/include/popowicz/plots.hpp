#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace popowicz {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Standalone SVG document. Output depends only on the input numbers.
std::string render_svg(const LinePlot& plot);

/// Column name -> values of a CSV with a header line.
using Table = std::map<std::string, std::vector<double>>;
Table read_table(const std::filesystem::path& path);

/// Writes SVGs into `dir` from its diagnostics.csv (required) and
/// snapshots.csv (optional): one plot per diagnostic series, the relative
/// drift of int (m + n), and u/v profiles at the first, middle and last
/// snapshot. Returns the files written, sorted.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

}  // namespace popowicz
