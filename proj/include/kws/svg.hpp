#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kws {

struct PlotSeries {
  std::string name;
  std::vector<double> xs, ys;
  bool points_only = false;  // scatter instead of a polyline
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  std::vector<PlotSeries> series;
};

// Self-contained line/scatter plot with axes, ticks and a legend. Output is
// deterministic for identical inputs.
void write_svg_plot(const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace kws
