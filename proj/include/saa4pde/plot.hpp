#pragma once

// Minimal log-log SVG plots: replicate scatter, mean line, fitted line.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "saa4pde/experiments.hpp"

namespace saa4pde {

struct PlotSeries {
  std::string label;
  std::vector<double> x;                   // one entry per grid point
  std::vector<std::vector<double>> values;  // replicate values at each x
};

/// log_b y = intercept + slope log_b x, drawn over the data range.
struct PlotFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::string label;
};

struct AxesConfig {
  std::string title;
  std::string xlabel = "N";
  std::string ylabel = "chi";
  int log_base = 2;  // 2 or 10
  int width = 640;
  int height = 480;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  return colors[i % 6];
}

}  // namespace detail

/// Standalone SVG text for the given series and fits.
inline std::string render_svg(const std::vector<PlotSeries>& series,
                              const std::vector<PlotFit>& fits, const AxesConfig& axes) {
  if (axes.log_base != 2 && axes.log_base != 10)
    throw std::invalid_argument("render_svg: log_base must be 2 or 10");
  const double lb = std::log(static_cast<double>(axes.log_base));
  const auto lg = [&](double v) { return std::log(v) / lb; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.values.size() != s.x.size())
      throw std::invalid_argument("render_svg: series '" + s.label + "' has mismatched sizes");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0)) throw std::invalid_argument("render_svg: x values must be positive");
      for (double v : s.values[i]) {
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        x0 = std::min(x0, lg(s.x[i]));
        x1 = std::max(x1, lg(s.x[i]));
        y0 = std::min(y0, lg(v));
        y1 = std::max(y1, lg(v));
        ++points;
      }
    }
  }
  if (points == 0) throw std::invalid_argument("render_svg: nothing to plot (empty series)");
  x0 = std::floor(x0);
  x1 = std::ceil(x1);
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;

  const double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = axes.width - left - right, ph = axes.height - top - bottom;
  const auto px = [&](double lx) { return left + (lx - x0) / (x1 - x0) * pw; };
  const auto py = [&](double ly) { return top + (y1 - ly) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << axes.width << "\" height=\""
    << axes.height << "\" viewBox=\"0 0 " << axes.width << ' ' << axes.height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!axes.title.empty())
    o << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << detail::xml_escape(axes.title) << "</text>\n";
  o << "<rect x=\"" << detail::num(left) << "\" y=\"" << detail::num(top) << "\" width=\""
    << detail::num(pw) << "\" height=\"" << detail::num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const std::string base = std::to_string(axes.log_base);
  const int xstep = std::max(1, static_cast<int>(std::ceil((x1 - x0) / 10)));
  for (int k = static_cast<int>(x0); k <= static_cast<int>(x1); k += xstep) {
    o << "<line x1=\"" << detail::num(px(k)) << "\" y1=\"" << detail::num(top + ph) << "\" x2=\""
      << detail::num(px(k)) << "\" y2=\"" << detail::num(top + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << detail::num(px(k)) << "\" y=\"" << detail::num(top + ph + 20)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << base << "^" << k << "</text>\n";
  }
  const int ystep = std::max(1, static_cast<int>(std::ceil((y1 - y0) / 10)));
  for (int k = static_cast<int>(y0); k <= static_cast<int>(y1); k += ystep) {
    o << "<line x1=\"" << detail::num(left - 5) << "\" y1=\"" << detail::num(py(k)) << "\" x2=\""
      << detail::num(left) << "\" y2=\"" << detail::num(py(k)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << detail::num(left - 8) << "\" y=\"" << detail::num(py(k) + 4)
      << "\" text-anchor=\"end\" font-size=\"12\">" << base << "^" << k << "</text>\n";
  }
  o << "<text x=\"" << detail::num(left + pw / 2) << "\" y=\"" << detail::num(axes.height - 10.0)
    << "\" text-anchor=\"middle\" font-size=\"14\">" << detail::xml_escape(axes.xlabel)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << detail::num(top + ph / 2) << "\" text-anchor=\"middle\" "
    << "font-size=\"14\" transform=\"rotate(-90 16 " << detail::num(top + ph / 2) << ")\">"
    << detail::xml_escape(axes.ylabel) << "</text>\n";

  double legend_y = top + 16;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = detail::palette(si);
    std::string mean_path;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (double v : s.values[i]) {
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        o << "<circle cx=\"" << detail::num(px(lg(s.x[i]))) << "\" cy=\"" << detail::num(py(lg(v)))
          << "\" r=\"2\" fill=\"" << color << "\" fill-opacity=\"0.35\"/>\n";
        sum += v;
        ++cnt;
      }
      if (cnt == 0) continue;
      mean_path += (mean_path.empty() ? "M" : " L") + detail::num(px(lg(s.x[i]))) + " " +
                   detail::num(py(lg(sum / static_cast<double>(cnt))));
    }
    if (!mean_path.empty())
      o << "<path d=\"" << mean_path << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    if (!s.label.empty()) {
      o << "<text x=\"" << detail::num(left + pw - 8) << "\" y=\"" << detail::num(legend_y)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
        << detail::xml_escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  for (const auto& f : fits) {
    const double ya = f.intercept + f.slope * x0, yb = f.intercept + f.slope * x1;
    o << "<line x1=\"" << detail::num(px(x0)) << "\" y1=\"" << detail::num(py(ya)) << "\" x2=\""
      << detail::num(px(x1)) << "\" y2=\"" << detail::num(py(yb))
      << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "slope %.3f", f.slope);
    std::string text = buf;
    if (!f.label.empty()) text = f.label + ": " + text;
    o << "<text x=\"" << detail::num(left + pw - 8) << "\" y=\"" << detail::num(legend_y)
      << "\" text-anchor=\"end\" font-size=\"12\">" << detail::xml_escape(text) << "</text>\n";
    legend_y += 16;
  }
  o << "</svg>\n";
  return o.str();
}

inline void emit_svg_plot(const std::vector<PlotSeries>& series, const std::vector<PlotFit>& fits,
                          const AxesConfig& axes, const std::string& path) {
  const std::string svg = render_svg(series, fits, axes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// One series over the swept parameter of `kind`, from converged rows.
inline PlotSeries series_from_rows(const std::vector<ResultRow>& rows, ExperimentKind kind,
                                   std::string label = "") {
  std::map<double, std::vector<double>> by;
  for (const auto& r : rows) {
    const double x = kind == ExperimentKind::rate    ? static_cast<double>(r.N)
                     : kind == ExperimentKind::alpha ? r.alpha
                                                     : static_cast<double>(r.n);
    auto& v = by[x];
    if (r.status == SolverStatus::converged && std::isfinite(r.chi)) v.push_back(r.chi);
  }
  PlotSeries s;
  s.label = std::move(label);
  for (auto& [x, v] : by) {
    s.x.push_back(x);
    s.values.push_back(std::move(v));
  }
  return s;
}

/// A RateFit is in log2; convert to the axes base.
inline PlotFit plot_fit(const RateFit& f, int log_base = 2, std::string label = "") {
  return {f.slope, f.intercept / std::log2(static_cast<double>(log_base)), std::move(label)};
}

}  // namespace saa4pde
