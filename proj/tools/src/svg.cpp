// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace eoslab::cli {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double x = log ? std::log10(v) : v;
    return (x - lo) / (hi - lo);
  }
};

Axis make_axis(double min_v, double max_v, bool log) {
  Axis a;
  a.log = log;
  if (log) {
    a.lo = std::floor(std::log10(min_v));
    a.hi = std::ceil(std::log10(max_v));
    if (a.hi <= a.lo) a.hi = a.lo + 1.0;
  } else {
    a.lo = min_v;
    a.hi = max_v;
    if (a.hi <= a.lo) {
      a.lo -= 0.5;
      a.hi += 0.5;
    }
  }
  return a;
}

}  // namespace

std::string render_plot(const PlotSpec& spec, const std::vector<Series>& series,
                        std::string_view stamp) {
  std::vector<Series> kept;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    Series k{s.label, {}, s.dashed};
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !std::isfinite(y) || (spec.log_y && !(y > 0.0))) continue;
      k.points.emplace_back(x, y);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    kept.push_back(std::move(k));
  }
  const bool empty = !(xmax > 0.0);
  if (empty) {
    xmin = 1.0;
    xmax = 10.0;
    ymin = spec.log_y ? 1.0 : 0.0;
    ymax = spec.log_y ? 10.0 : 1.0;
  }
  const Axis ax = make_axis(xmin, xmax, true);
  const Axis ay = make_axis(ymin, ymax, spec.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.map(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.map(y)) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format("<!-- generated {} -->\n", stamp);
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} "
      "{1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     kLeft + pw / 2, escape(spec.title));
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, pw, ph);

  // x ticks at decades
  for (double e = ax.lo; e <= ax.hi + 1e-9; e += 1.0) {
    const double x = kLeft + (e - ax.lo) / (ax.hi - ax.lo) * pw;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", x, kTop,
        kTop + ph);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">1e{}</text>\n", x,
                       kTop + ph + 18, static_cast<int>(e));
  }
  // y ticks: decades on log axes, five steps otherwise
  const int ysteps = ay.log ? static_cast<int>(ay.hi - ay.lo) : 5;
  const int stride = std::max(1, ysteps / 10);
  for (int k = 0; k <= ysteps; k += stride) {
    const double frac = double(k) / double(ysteps);
    const double y = kTop + (1.0 - frac) * ph;
    const double val = ay.lo + frac * (ay.hi - ay.lo);
    const std::string label =
        ay.log ? fmt::format("1e{}", static_cast<int>(std::lround(val))) : fmt::format("{:.3g}", val);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft, y,
        kLeft + pw);
    svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6,
                       y + 4, label);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                     kHeight - 16, escape(spec.x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(spec.y_label));

  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& s = kept[i];
    const char* color = kColors[i % kColors.size()];
    if (s.points.size() >= 2) {
      std::string pts;
      for (const auto& [x, y] : s.points) pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
      pts.pop_back();
      svg += fmt::format(
          "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.3\"{} points=\"{}\"/>\n", color,
          s.dashed ? " stroke-dasharray=\"5,3\"" : "", pts);
    }
    const double ly = kTop + 14.0 + 18.0 * double(i);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
        kLeft + pw + 12, ly, kLeft + pw + 36, color, s.dashed ? " stroke-dasharray=\"5,3\"" : "");
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw + 42, ly + 4,
                       escape(s.label));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace eoslab::cli
