#pragma once

#include <string>
#include <vector>

namespace nondecomp {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG 1.1 line plot (no external references). Non-finite
// points break the polyline.
std::string render_line_plot(const std::string& title,
                             const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series,
                             int width = 720, int height = 460);

}  // namespace nondecomp
