#pragma once

// Convergence plot: mean error against particle count, one polyline per
// resampler. Plain SVG 1.1, no external renderer.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crtrack/benchmark.hpp"
#include "crtrack/error.hpp"

namespace crtrack {

struct PlotSeries {
  std::string label;
  std::vector<double> x;  // particle counts, ascending
  std::vector<double> y;  // mean error (px)
};

struct PlotOptions {
  int width = 640;
  int height = 420;
  std::string title = "Mean error vs. number of particles";
  std::string object;  // restrict to one object; empty means all rows
};

/// Averages mean_error over runs (and objects, unless filtered) per
/// (resampler, N). Series keep first-appearance order.
inline std::vector<PlotSeries> convergence_series(const BenchmarkReport& report, const std::string& object = {}) {
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>> acc;
  for (const auto& r : report.rows) {
    if (!object.empty() && r.object != object) continue;
    if (!acc.count(r.resampler)) order.push_back(r.resampler);
    auto& cell = acc[r.resampler][r.particles];
    cell.first += r.mean_error;
    ++cell.second;
  }
  std::vector<PlotSeries> out;
  for (const auto& label : order) {
    PlotSeries s{label, {}, {}};
    for (const auto& [n, sum] : acc[label]) {
      s.x.push_back(static_cast<double>(n));
      s.y.push_back(sum.first / static_cast<double>(sum.second));
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline std::string svg_escape(const std::string& s) {
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

inline std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
                                  "#7f7f7f"};
  return palette[i % (sizeof palette / sizeof *palette)];
}

}  // namespace detail

/// Renders the series. Requires at least one series with two or more points.
inline std::string render_convergence_svg(const std::vector<PlotSeries>& series, const PlotOptions& opt = {}) {
  bool enough = false;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = 0.0, y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    if (s.x.size() >= 2) enough = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!enough) throw Error(Errc::insufficient_data, "need at least two particle counts for one resampler");
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  y_hi *= 1.05;

  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return top + ph - (y - y_lo) / (y_hi - y_lo) * ph; };
  using detail::fmt;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << detail::svg_escape(opt.title) << "</text>\n";

  // Axes and ticks.
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
      << fmt(top + ph) << "\"/>\n"
      << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\""
      << fmt(top + ph) << "\"/>\n</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  std::vector<double> xticks;
  for (const auto& s : series) xticks.insert(xticks.end(), s.x.begin(), s.x.end());
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  for (double x : xticks)
    svg << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(top + ph + 16) << "\" text-anchor=\"middle\">"
        << fmt(x, "%g") << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = y_lo + (y_hi - y_lo) * i / 5.0;
    svg << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(sy(y) + 4) << "\" text-anchor=\"end\">"
        << fmt(y, "%.3g") << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(opt.height - 12.0)
      << "\" text-anchor=\"middle\">Number of particles N</text>\n"
      << "<text x=\"16\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt(top + ph / 2) << ")\">Mean error (px)</text>\n</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    svg << "<polyline class=\"series\" data-label=\"" << detail::svg_escape(s.label)
        << "\" fill=\"none\" stroke-width=\"2\" stroke=\"" << detail::series_color(i) << "\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) svg << (j ? " " : "") << fmt(sx(s.x[j])) << ',' << fmt(sy(s.y[j]));
    svg << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(left + pw + 32)
        << "\" y2=\"" << fmt(ly) << "\" stroke-width=\"2\" stroke=\"" << detail::series_color(i) << "\"/>\n"
        << "<text x=\"" << fmt(left + pw + 38) << "\" y=\"" << fmt(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::svg_escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_convergence_plot(const BenchmarkReport& report, const std::filesystem::path& out,
                                  const PlotOptions& opt = {}) {
  const std::string svg = render_convergence_svg(convergence_series(report, opt.object), opt);
  std::ofstream file(out);
  if (!file) throw Error(Errc::io_error, "cannot open " + out.string() + " for writing");
  file << svg;
  if (!file) throw Error(Errc::io_error, "write failed for " + out.string());
}

}  // namespace crtrack
