#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace indl {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double opacity = 1.0;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 400;
};

/// Self-contained SVG line chart with axes, tick labels and a legend.
std::string render_line_plot(const std::vector<PlotSeries>& series, const PlotSpec& spec);

void write_line_plot(const std::vector<PlotSeries>& series, const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace indl
