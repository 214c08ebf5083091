// Minimal SVG line plot for rate curves: one polyline per series plus axis
// ticks and a legend whose labels match the CSV headers.

#pragma once

#include "qdl/rates.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

namespace qdl_cli {

inline std::string rate_curve_svg(const qdl::RateCurve& curve) {
  const int width = 640, height = 480;
  const int ml = 60, mr = 160, mt = 20, mb = 50;
  const double x0 = 0.0, x1 = 1.0;
  double y1 = 1e-9;
  for (const auto& s : curve.series)
    for (double v : s.values) y1 = std::max(y1, v);
  y1 *= 1.05;

  auto px = [&](double x) {
    return ml + (x - x0) / (x1 - x0) * (width - ml - mr);
  };
  auto py = [&](double y) { return height - mb - y / y1 * (height - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  static const char* dashes[] = {"", "8,4", "2,3", "6,2,2,2"};

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"black\"/>\n",
                ml, height - mb, width - mr, height - mb);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                "stroke=\"black\"/>\n",
                ml, mt, ml, height - mb);
  svg += buf;
  for (int i = 0; i <= 5; ++i) {
    double x = i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" "
                  "stroke=\"black\"/>\n",
                  px(x), height - mb, px(x), height - mb + 5);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%d\" font-size=\"12\" "
                  "text-anchor=\"middle\">%.1f</text>\n",
                  px(x), height - mb + 20, x);
    svg += buf;
    double y = y1 * i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
                  "stroke=\"black\"/>\n",
                  ml - 5, py(y), ml, py(y));
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"12\" "
                  "text-anchor=\"end\">%.2f</text>\n",
                  ml - 8, py(y) + 4, y);
    svg += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%d\" font-size=\"13\" "
                "text-anchor=\"middle\">p</text>\n",
                px(0.5), height - 8);
  svg += buf;
  svg +=
      "<text x=\"15\" y=\"240\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 15 240)\">bits per channel use</text>\n";

  for (std::size_t si = 0; si < curve.series.size(); ++si) {
    const auto& s = curve.series[si];
    std::string pts;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(curve.grid[i]),
                    py(s.values[i]));
      pts += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.6\" "
                  "stroke-dasharray=\"%s\" points=\"%s\"/>\n",
                  colors[si % 4], dashes[si % 4], pts.c_str());
    svg += buf;
    // legend
    double ly = mt + 20 + 22.0 * si;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
                  "stroke=\"%s\" stroke-width=\"1.6\" "
                  "stroke-dasharray=\"%s\"/>\n",
                  width - mr + 10, ly, width - mr + 40, ly, colors[si % 4],
                  dashes[si % 4]);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"12\">%s</text>\n",
                  width - mr + 46, ly + 4, s.name.c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace qdl_cli
