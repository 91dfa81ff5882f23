#pragma once

#include <string>
#include <vector>

namespace crutchlab::io {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional band drawn behind the line (same length as x), e.g. mean +- SD.
  std::vector<double> lower;
  std::vector<double> upper;
  std::string color;  // empty picks from the palette
  bool markers = false;
  bool legend = true;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 720;
  int height = 460;
  /// Same scale on both axes (side views of geometry).
  bool equal_aspect = false;
};

/// Standalone SVG line chart. Each series is also embedded verbatim as
/// data-x / data-y attributes so plotted values can be recovered exactly.
std::string render_svg(const Chart& chart);

}  // namespace crutchlab::io
