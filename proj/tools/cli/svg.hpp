#pragma once

#include <string>
#include <vector>

namespace lissnas::cli {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool step = false;  // right-continuous step instead of a polyline
};

/// Minimal standalone SVG chart with axes, tick labels and a legend.
std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

}  // namespace lissnas::cli
