#pragma once

#include <string>
#include <vector>

namespace iae::svg {

// Dependency-free SVG emission with deterministic byte output.

struct PlotOptions {
  int width = 640;
  int height = 480;
  double point_radius = 2.0;
  std::string title;
  bool log_y = false;
};

// 2D scatter of n points (x, y); `color_values` (optional, same length)
// maps through a fixed blue-to-red ramp.
std::string scatter(const std::vector<double>& xy, int n,
                    const std::vector<double>& color_values, const PlotOptions& opt);

// Line plot: shared x values, one polyline per named series.
struct Series {
  std::string name;
  std::vector<double> y;
};
std::string line_plot(const std::vector<double>& x, const std::vector<Series>& series,
                      const PlotOptions& opt);

void write_file(const std::string& content, const std::string& path);

} // namespace iae::svg
