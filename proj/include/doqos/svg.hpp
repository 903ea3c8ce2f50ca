#pragma once

// Minimal SVG line plot for curves. Log axes are chosen when the data span
// more than a decade and stay positive.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "doqos/curve.hpp"

namespace doqos {

namespace detail {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v, double px_lo, double px_hi) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return px_lo + (x - a) / (b - a) * (px_hi - px_lo);
  }
};

inline Axis fit_axis(const std::vector<double>& values, double floor_for_log) {
  Axis ax;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double pos_lo = lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (v > 0.0) pos_lo = std::min(pos_lo, v);
  }
  if (!std::isfinite(lo)) return ax;
  if (pos_lo < hi && hi / pos_lo > 10.0 && (lo > 0.0 || floor_for_log > 0.0)) {
    ax.log = true;
    ax.lo = std::max(pos_lo, floor_for_log);
    ax.hi = hi;
  } else {
    ax.lo = lo;
    ax.hi = hi > lo ? hi : lo + 1.0;
  }
  return ax;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

inline void write_svg(std::ostream& out, const std::vector<Curve>& curves, const std::string& x_label,
                      const std::string& y_label) {
  constexpr double kW = 720, kH = 480, kL = 70, kR = 180, kT = 20, kB = 50;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::vector<double> xs, ys;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      xs.push_back(p.threshold);
      ys.push_back(p.value);
    }
  }
  // x may start at 0 (waiting time); y on log scale stops at 1e-12.
  const auto ax = detail::fit_axis(xs, 0.0);
  const auto ay = detail::fit_axis(ys, 1e-12);
  const double x0 = kL, x1 = kW - kR, y0 = kH - kB, y1 = kT;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
      << y0 - y1 << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = ax.log ? std::pow(10.0, std::log10(ax.lo) + i * (std::log10(ax.hi) - std::log10(ax.lo)) / 4)
                             : ax.lo + i * (ax.hi - ax.lo) / 4;
    const double fy = ay.log ? std::pow(10.0, std::log10(ay.lo) + i * (std::log10(ay.hi) - std::log10(ay.lo)) / 4)
                             : ay.lo + i * (ay.hi - ay.lo) / 4;
    const double px = ax.map(fx, x0, x1);
    const double py = ay.map(fy, y0, y1);
    out << "<text x=\"" << px << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << detail::fmt(fx) << "</text>\n";
    out << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
        << detail::fmt(fy) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
      << x_label << (ax.log ? " (log)" : "") << "</text>\n";
  out << "<text transform=\"translate(16," << (y0 + y1) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << y_label << (ay.log ? " (log)" : "")
      << "</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (curves[i].method == Method::MonteCarlo ? " stroke-dasharray=\"4 3\"" : "")
        << " points=\"";
    for (const auto& p : curves[i].points) {
      if (ax.log && p.threshold <= 0.0) continue;
      if (ay.log && p.value < ay.lo) continue;
      out << detail::fmt(ax.map(p.threshold, x0, x1)) << ',' << detail::fmt(ay.map(p.value, y0, y1))
          << ' ';
    }
    out << "\"/>\n";
    const double ly = y1 + 14 + 18 * static_cast<double>(i);
    out << "<line x1=\"" << x1 + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << x1 + 30 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\"/>\n";
    out << "<text x=\"" << x1 + 36 << "\" y=\"" << ly << "\">" << curves[i].label << ' '
        << to_string(curves[i].method) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace doqos
