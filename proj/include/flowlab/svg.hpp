// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "flowlab/common.hpp"

namespace flowlab {

// Minimal line/scatter plotter writing standalone SVG.  The viewport is
// fitted to the union of all series with a 5% pad, the y axis points up, and
// the corner coordinates are labeled.  Presentation only: nothing computed
// here feeds back into any CSV.
class SvgPlot {
 public:
  SvgPlot(double width = 640.0, double height = 480.0, std::string title = "");

  void line(const Vec& xs, const Vec& ys, const std::string& color, double stroke = 1.5);
  void scatter(const Vec& xs, const Vec& ys, const std::string& color, double radius = 2.5);

  std::string render() const;

 private:
  struct Series {
    bool is_line = false;
    std::vector<double> xs, ys;
    std::string color;
    double size = 0.0;
  };

  double width_, height_;
  std::string title_;
  std::vector<Series> series_;
};

void save_svg(const SvgPlot& plot, const std::string& path);

}  // namespace flowlab
