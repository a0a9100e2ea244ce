// svg_plot.hpp : self-contained polyline charts for study outputs
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "anysr/common.hpp"

namespace anysr {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), plotted as given
};

// Writes a minimal line chart: axes, light ticks, one polyline per series,
// legend in the top-right corner.
inline void write_svg_lines(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<PlotSeries>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 720, height = 480;
  const double ml = 64, mr = 24, mt = 40, mb = 48;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const PlotSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
  auto sy = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };

  std::ofstream os(path);
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "cannot write " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";

  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / ticks;
    const double fy = y_min + (y_max - y_min) * i / ticks;
    os << "<line x1=\"" << sx(fx) << "\" y1=\"" << height - mb << "\" x2=\"" << sx(fx)
       << "\" y2=\"" << mt << "\" stroke=\"#eeeeee\"/>\n"
       << "<text x=\"" << sx(fx) << "\" y=\"" << height - mb + 16
       << "\" text-anchor=\"middle\">" << format_double(fx, 4) << "</text>\n"
       << "<line x1=\"" << ml << "\" y1=\"" << sy(fy) << "\" x2=\"" << width - mr << "\" y2=\""
       << sy(fy) << "\" stroke=\"#eeeeee\"/>\n"
       << "<text x=\"" << ml - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">"
       << format_double(fy, 4) << "</text>\n";
  }
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
     << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << ml << "\" y2=\"" << mt
     << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
     << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << height / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points)
      os << format_double(sx(x), 6) << "," << format_double(sy(y), 6) << " ";
    os << "\"/>\n"
       << "<rect x=\"" << width - mr - 150 << "\" y=\"" << mt + 18.0 * i << "\" width=\"12\""
       << " height=\"12\" fill=\"" << color << "\"/>\n"
       << "<text x=\"" << width - mr - 132 << "\" y=\"" << mt + 18.0 * i + 10 << "\">"
       << series[i].label << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw IoError(IoErrorKind::kWriteFailed, "SVG write failed: " + path);
}

}  // namespace anysr
