#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace isac {

/// One labelled polyline of a chart.
struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  ///< (x, y), plot order
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;  ///< requires strictly positive y values
};

/// Renders a self-contained SVG line chart: fixed canvas, fixed palette,
/// coordinates written with fixed precision — byte-identical output for
/// identical input. Throws std::invalid_argument when there is nothing to
/// plot or a log-scale axis meets a nonpositive value.
void write_line_chart(std::span<const Series> series,
                      const ChartOptions& opt,
                      const std::filesystem::path& file);

}  // namespace isac
