// SPDX-License-Identifier: Apache-2.0
#include "flowlab/grid.hpp"

#include <cmath>

namespace flowlab {

TimeGrid make_grid(const std::string& kind, Index steps, double epsilon) {
  require(steps >= 1, "make_grid: steps must be >= 1");
  require(epsilon > 0.0 && epsilon < 1.0, "make_grid: epsilon must lie in (0,1)");
  TimeGrid grid;
  grid.epsilon = epsilon;
  grid.nodes.resize(steps + 1);
  if (kind == "uniform") {
    for (Index k = 0; k <= steps; ++k)
      grid.nodes(k) = (1.0 - epsilon) * (static_cast<double>(k) / static_cast<double>(steps));
  } else if (kind == "geometric") {
    for (Index k = 0; k <= steps; ++k)
      grid.nodes(k) =
          1.0 - std::pow(epsilon, static_cast<double>(k) / static_cast<double>(steps));
  } else {
    throw config_error("make_grid: unknown kind '" + kind + "' (expected uniform|geometric)");
  }
  grid.nodes(0) = 0.0;
  grid.nodes(steps) = 1.0 - epsilon;
  for (Index k = 0; k < steps; ++k)
    check(grid.nodes(k) < grid.nodes(k + 1),
          "make_grid: nodes must increase strictly (steps too large for this epsilon)");
  return grid;
}

}  // namespace flowlab
