#pragma once

#include <span>
#include <string>
#include <vector>

#include "bweb/geometry.hpp"

namespace bweb::cli {

// One polyline per path with finite knots; space runs left to right and time
// upwards. Paths are expected to be deduplicated already.
std::string render_paths_svg(std::span<const Path> paths);

struct Curve {
  std::string label;
  std::vector<double> x, y, err;  // err: half-height of the error bar
};

// Line and marker plot with error bars. Log x when requested (x must then be
// positive; other points are dropped).
std::string render_curves_svg(const std::vector<Curve>& curves, const std::string& title,
                              const std::string& x_label, bool log_x);

}  // namespace bweb::cli
