#pragma once

#include <string>
#include <vector>

#include "collapse/types.hpp"

namespace collapse::svg {

struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Polyline plot, one colour per series, with a legend.
std::string line_plot(const Axes& axes, const std::vector<Series>& series);
/// Point cloud of the first two columns.
std::string scatter_plot(const Axes& axes, const Matrix& points);
/// Heatmap of values (rows along y, columns along x) with a diverging palette.
std::string heatmap(const Axes& axes, const std::vector<double>& xs, const std::vector<double>& ys,
                    const Matrix& values);

void write(const std::string& document, const std::string& path);

}  // namespace collapse::svg
