#pragma once

// Pairwise scatter panels rendered as a standalone SVG document.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "mevgen/errors.hpp"
#include "mevgen/sampling.hpp"

namespace mevgen::io {

enum class AxisScale { linear, log };

struct PlotRequest {
  std::string batch_path;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // one-based coordinates
  std::string output_path;
  AxisScale scale = AxisScale::linear;
};

struct PlotLayout {
  static constexpr double kPanel = 360.0;
  static constexpr double kLeft = 56.0;
  static constexpr double kRight = 12.0;
  static constexpr double kTop = 16.0;
  static constexpr double kBottom = 44.0;
  static constexpr double kPointRadius = 1.5;
  // Linear axes run from 0 to this quantile of the plotted coordinate.
  static constexpr double kClipQuantile = 0.995;
};

inline void check_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                        std::size_t d) {
  for (const auto& [s, k] : pairs) {
    if (s < 1 || s > d || k < 1 || k > d) {
      throw DomainError("pair (" + std::to_string(s) + "," + std::to_string(k) +
                        ") references a coordinate outside 1.." + std::to_string(d));
    }
  }
}

namespace detail {

inline std::string fmt(const char* pattern, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  std::vector<double> ticks;  // in data units

  double unit(double v) const {
    if (log) return (std::log10(v) - lo) / (hi - lo);
    return (v - lo) / (hi - lo);
  }
};

inline double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0;
  return nice * mag;
}

inline Axis make_axis(std::vector<double> values, bool log) {
  Axis a;
  a.log = log;
  if (log) {
    double mn = 0.0;
    double mx = 1.0;
    if (!values.empty()) {
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      mn = std::floor(std::log10(*lo));
      mx = std::ceil(std::log10(*hi));
      if (mx <= mn) mx = mn + 1.0;
    }
    a.lo = mn;
    a.hi = mx;
    for (double e = mn; e <= mx + 0.5; e += 1.0) a.ticks.push_back(std::pow(10.0, e));
    return a;
  }
  double top = 1.0;
  if (!values.empty()) {
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(PlotLayout::kClipQuantile * static_cast<double>(values.size()))) - 1;
    top = values[std::min(idx, values.size() - 1)];
    if (!(top > 0.0)) top = 1.0;
  }
  const double step = nice_step(top);
  a.lo = 0.0;
  a.hi = std::ceil(top / step) * step;
  for (double v = 0.0; v <= a.hi + step * 0.5; v += step) a.ticks.push_back(v);
  return a;
}

inline std::string tick_label(double v, bool log) {
  if (log) return "1e" + fmt("%.0f", std::log10(v));
  if (v == std::floor(v) && std::abs(v) < 1e6) return fmt("%.0f", v);
  return fmt("%g", v);
}

}  // namespace detail

// One panel per pair, laid out left to right. Output depends only on the data and request.
inline std::string render_scatter_svg(const SampleBatch& batch,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                      AxisScale scale) {
  using L = PlotLayout;
  check_pairs(pairs, batch.d);
  const bool log = scale == AxisScale::log;
  const double width = L::kPanel * static_cast<double>(std::max<std::size_t>(pairs.size(), 1));
  const double plot_w = L::kPanel - L::kLeft - L::kRight;
  const double plot_h = L::kPanel - L::kTop - L::kBottom;
  const auto f2 = [](double v) { return detail::fmt("%.2f", v); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(width) + "\" height=\"" +
         f2(L::kPanel) + "\" viewBox=\"0 0 " + f2(width) + " " + f2(L::kPanel) + "\">\n";
  svg += "<!-- mevgen scatter: panel " + f2(L::kPanel) + "x" + f2(L::kPanel) + " px, point radius " +
         f2(L::kPointRadius) + " px, " +
         (log ? std::string("log10 axes spanning whole decades")
              : "linear axes from 0 to the " + detail::fmt("%.1f", L::kClipQuantile * 100.0) +
                    "th percentile") +
         ", n = " + std::to_string(batch.n) + " -->\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const auto column = [&batch](std::size_t c) {
    std::vector<double> v;
    v.reserve(batch.n);
    for (std::size_t t = 0; t < batch.n; ++t) {
      const double x = batch.data(t, c);
      if (std::isfinite(x) && x > 0.0) v.push_back(x);
    }
    return v;
  };

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [s, k] = pairs[p];
    const detail::Axis ax = detail::make_axis(column(s - 1), log);
    const detail::Axis ay = detail::make_axis(column(k - 1), log);
    const double ox = L::kPanel * static_cast<double>(p) + L::kLeft;
    const double oy = L::kTop + plot_h;

    svg += "<g id=\"panel-" + std::to_string(s) + "-" + std::to_string(k) + "\">\n";
    svg += "<rect x=\"" + f2(ox) + "\" y=\"" + f2(L::kTop) + "\" width=\"" + f2(plot_w) +
           "\" height=\"" + f2(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks) {
      const double px = ox + ax.unit(t) * plot_w;
      svg += "<line x1=\"" + f2(px) + "\" y1=\"" + f2(oy) + "\" x2=\"" + f2(px) + "\" y2=\"" +
             f2(oy + 4) + "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + f2(px) + "\" y=\"" + f2(oy + 16) +
             "\" font-size=\"10\" text-anchor=\"middle\">" + detail::tick_label(t, log) + "</text>\n";
    }
    for (double t : ay.ticks) {
      const double py = oy - ay.unit(t) * plot_h;
      svg += "<line x1=\"" + f2(ox - 4) + "\" y1=\"" + f2(py) + "\" x2=\"" + f2(ox) + "\" y2=\"" +
             f2(py) + "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + f2(ox - 6) + "\" y=\"" + f2(py + 3) +
             "\" font-size=\"10\" text-anchor=\"end\">" + detail::tick_label(t, log) + "</text>\n";
    }
    svg += "<text x=\"" + f2(ox + plot_w / 2) + "\" y=\"" + f2(L::kPanel - 8) +
           "\" font-size=\"12\" text-anchor=\"middle\">X_" + std::to_string(s) + "</text>\n";
    const double lx = L::kPanel * static_cast<double>(p) + 14.0;
    const double ly = L::kTop + plot_h / 2;
    svg += "<text x=\"" + f2(lx) + "\" y=\"" + f2(ly) +
           "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 " + f2(lx) + " " +
           f2(ly) + ")\">X_" + std::to_string(k) + "</text>\n";

    for (std::size_t t = 0; t < batch.n; ++t) {
      const double x = batch.data(t, s - 1);
      const double y = batch.data(t, k - 1);
      if (!(std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0)) continue;
      const double ux = ax.unit(x);
      const double uy = ay.unit(y);
      if (ux < 0.0 || ux > 1.0 || uy < 0.0 || uy > 1.0) continue;
      svg += "<circle cx=\"" + f2(ox + ux * plot_w) + "\" cy=\"" + f2(oy - uy * plot_h) +
             "\" r=\"" + f2(L::kPointRadius) + "\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mevgen::io
