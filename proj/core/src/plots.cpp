#include "popowicz/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "popowicz/grid.hpp"

namespace popowicz {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  if (hi - lo <= 1e-300 + 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
    const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const Series& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  const auto [x0, x1] = padded_range(xlo, xhi);
  const auto [y0, y1] = padded_range(ylo, yhi);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth, "%.0f") << "\" height=\""
    << fmt(kHeight, "%.0f") << "\" viewBox=\"0 0 " << fmt(kWidth, "%.0f") << ' ' << fmt(kHeight, "%.0f") << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << escape(plot.title) << "</text>\n"
    << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(kTop + ph + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv, "%.4g") << "</text>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv, "%.4g") << "</text>\n";
  }
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 8)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(plot.x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"12\" transform=\"rotate(-90 16 " << fmt(kTop + ph / 2) << ")\">" << escape(plot.y_label)
    << "</text>\n";

  std::size_t index = 0;
  for (const Series& s : plot.series) {
    const char* color = kColors[index % std::size(kColors)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    std::ostringstream pts;
    std::size_t shown = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (shown++ > 0) pts << ' ';
      pts << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
    }
    if (shown == 1) {
      const std::string p = pts.str();
      const auto comma = p.find(',');
      o << "<circle cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    } else if (shown > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    }
    o << "<text x=\"" << fmt(kLeft + pw - 8) << "\" y=\"" << fmt(kTop + 16 + 14.0 * index)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
      << escape(s.label) << "</text>\n";
    ++index;
  }
  o << "</svg>\n";
  return o.str();
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path.string() + " has no header line");
  const std::vector<std::string> header = split(line);
  Table table;
  for (const std::string& h : header) table[h];
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw InvalidInput(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        table[header[i]].push_back(std::stod(cells[i]));
      } catch (const std::exception&) {
        table[header[i]].push_back(NAN);
      }
    }
  }
  return table;
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir) {
  static const std::vector<std::string> columns{"t",    "total_momentum", "half_line_momentum", "blowup_integrand",
                                                "blowup_integral", "l1_m",   "l1_n", "min_m", "min_n"};
  const Table diag = read_table(dir / "diagnostics.csv");
  for (const std::string& c : columns) {
    if (!diag.count(c)) throw InvalidInput("diagnostics.csv: missing column '" + c + "'");
  }
  std::vector<std::filesystem::path> written;
  auto save = [&](const std::string& name, const LinePlot& plot) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << render_svg(plot);
    written.push_back(path);
  };

  const std::vector<double>& t = diag.at("t");
  for (std::size_t i = 1; i < columns.size(); ++i) {
    save("plot_" + columns[i] + ".svg", LinePlot{columns[i] + " vs t", "t", columns[i],
                                                 {Series{columns[i], t, diag.at(columns[i])}}});
  }

  const std::vector<double>& total = diag.at("total_momentum");
  std::vector<double> drift(total.size(), 0.0);
  if (!total.empty()) {
    const double scale = std::max(std::abs(total.front()), 1e-300);
    for (std::size_t i = 0; i < total.size(); ++i) drift[i] = (total[i] - total.front()) / scale;
  }
  save("conserved_drift.svg", LinePlot{"relative drift of int (m + n)", "t", "drift", {Series{"drift", t, drift}}});

  if (std::filesystem::exists(dir / "snapshots.csv")) {
    const Table snap = read_table(dir / "snapshots.csv");
    for (const char* c : {"t", "x", "u", "v"}) {
      if (!snap.count(c)) throw InvalidInput(std::string("snapshots.csv: missing column '") + c + "'");
    }
    const std::vector<double>& st = snap.at("t");
    std::vector<double> times;
    for (double v : st) {
      if (times.empty() || times.back() != v) times.push_back(v);
    }
    std::vector<double> picked;
    if (!times.empty()) {
      std::set<std::size_t> idx{0, times.size() / 2, times.size() - 1};
      for (std::size_t k : idx) picked.push_back(times[k]);
    }
    for (const char* channel : {"u", "v"}) {
      LinePlot plot{std::string(channel) + " profiles", "x", channel, {}};
      for (double tp : picked) {
        Series s{"t = " + fmt(tp, "%.4g"), {}, {}};
        for (std::size_t i = 0; i < st.size(); ++i) {
          if (st[i] != tp) continue;
          s.x.push_back(snap.at("x")[i]);
          s.y.push_back(snap.at(channel)[i]);
        }
        plot.series.push_back(std::move(s));
      }
      save(std::string("profiles_") + channel + ".svg", plot);
    }
  }
  std::sort(written.begin(), written.end());
  return written;
}

}  // namespace popowicz
