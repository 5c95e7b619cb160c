#pragma once

#include <string>
#include <vector>

namespace odefit {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "epoch";
  std::string y_label;
  bool log_y = true;
  int width = 720;
  int height = 440;
};

/// Standalone SVG line chart. On a log axis, non-positive and non-finite
/// points are dropped and split the polyline.
std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace odefit
