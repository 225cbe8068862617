// SVG picture of a developed trajectory: the unfolded chart copies it passes
// through, outlined, with the straight developed path on top.
#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

#include "conesurf/surface.hpp"
#include "conesurf/tracer.hpp"

namespace conesurf {

struct SvgOptions {
  double size = 800.0;   // longer side in pixels
  double margin = 20.0;
  std::string comment;   // emitted as an XML comment when non-empty
};

inline std::string developed_svg(const ConeSurface& s, const TraceResult& tr, const SvgOptions& opts = {}) {
  const DevelopedPath dp = develop(tr);
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  auto grow = [&](Vec2 p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  };
  for (std::size_t k = 0; k < tr.segments.size(); ++k)
    for (const Vec2 v : s.chart(tr.segments[k].chart).vertices) grow(dp.frames[k].apply(v));
  for (const Vec2 p : dp.points) grow(p);
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  const double scale = (opts.size - 2 * opts.margin) / std::max(x1 - x0, y1 - y0);
  const double w = (x1 - x0) * scale + 2 * opts.margin;
  const double h = (y1 - y0) * scale + 2 * opts.margin;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  auto pt = [&](Vec2 p) { return num(opts.margin + (p.x - x0) * scale) + "," + num(h - opts.margin - (p.y - y0) * scale); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h) << "\">\n";
  if (!opts.comment.empty()) out << "<!-- " << opts.comment << " -->\n";
  out << "<g fill=\"none\" stroke=\"#999\" stroke-width=\"1\">\n";
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    out << "<polygon points=\"";
    const auto& poly = s.chart(tr.segments[k].chart);
    for (std::size_t i = 0; i < poly.size(); ++i) out << (i ? " " : "") << pt(dp.frames[k].apply(poly.vertex(i)));
    out << "\"/>\n";
  }
  out << "</g>\n<polyline fill=\"none\" stroke=\"#c00\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < dp.points.size(); ++i) out << (i ? " " : "") << pt(dp.points[i]);
  out << "\"/>\n</svg>\n";
  return out.str();
}

}  // namespace conesurf
