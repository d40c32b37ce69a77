#pragma once

// Static SVG line plots of log-posterior traces.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"

namespace qpmcmc::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

/// Overlays every series on shared axes with a legend in the top-right.
inline std::string render_traces(const std::vector<Series>& series, const std::string& title,
                                 const std::string& x_label = "iteration",
                                 const std::string& y_label = "log posterior") {
  if (series.empty()) throw Error(ErrorCode::invalid_argument, "nothing to plot");
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  constexpr double width = 800, height = 500;
  constexpr double left = 80, right = 20, top = 40, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw Error(ErrorCode::invalid_argument, "series x/y length mismatch");
    for (double v : s.x) x_min = std::min(x_min, v), x_max = std::max(x_max, v);
    for (double v : s.y) y_min = std::min(y_min, v), y_max = std::max(y_max, v);
  }
  if (!std::isfinite(x_min)) throw Error(ErrorCode::invalid_argument, "series are empty");
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  auto sx = [&](double v) { return left + (v - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double v) { return top + plot_h - (v - y_min) / (y_max - y_min) * plot_h; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
  out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         detail::escape(title) + "</text>\n";
  out += "<g stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top + plot_h) + "\" x2=\"" +
         detail::num(left + plot_w) + "\" y2=\"" + detail::num(top + plot_h) + "\"/>\n";
  out += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" + detail::num(left) +
         "\" y2=\"" + detail::num(top + plot_h) + "\"/>\n";
  out += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    out += "<text x=\"" + detail::num(sx(xv)) + "\" y=\"" + detail::num(top + plot_h + 16) +
           "\" text-anchor=\"middle\">" + detail::tick_label(xv) + "</text>\n";
    out += "<text x=\"" + detail::num(left - 6) + "\" y=\"" + detail::num(sy(yv) + 4) +
           "\" text-anchor=\"end\">" + detail::tick_label(yv) + "</text>\n";
  }
  out += "<text x=\"" + detail::num(left + plot_w / 2) + "\" y=\"" + detail::num(height - 16) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + detail::escape(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + detail::num(top + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
         detail::num(top + plot_h / 2) + ")\">" + detail::escape(y_label) + "</text>\n";
  out += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = kPalette[i % std::size(kPalette)];
    out += "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" + std::string(colour) + "\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (k) out.push_back(' ');
      out += detail::num(sx(s.x[k])) + "," + detail::num(sy(s.y[k]));
    }
    out += "\"/>\n";
  }

  out += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 14 + 18.0 * static_cast<double>(i);
    const char* colour = kPalette[i % std::size(kPalette)];
    out += "<line x1=\"" + detail::num(width - right - 150) + "\" y1=\"" + detail::num(y - 4) + "\" x2=\"" +
           detail::num(width - right - 126) + "\" y2=\"" + detail::num(y - 4) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + detail::num(width - right - 120) + "\" y=\"" + detail::num(y) + "\">" +
           detail::escape(series[i].label) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace qpmcmc::svg
