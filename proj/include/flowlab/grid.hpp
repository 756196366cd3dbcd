// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "flowlab/common.hpp"

namespace flowlab {

// Integration grid on [0, 1-epsilon].  Node 0 is exactly 0, the last node is
// exactly 1-epsilon, and nodes increase strictly.
struct TimeGrid {
  Vec nodes;
  double epsilon = 0.0;

  Index steps() const { return nodes.size() - 1; }
};

// kind "uniform": equal gaps.
// kind "geometric": the distances 1 - t_k form a geometric sequence from 1
// down to epsilon, so consecutive gaps shrink by the constant ratio
// r = epsilon^(1/steps) and the grid refines toward the singular endpoint.
TimeGrid make_grid(const std::string& kind, Index steps, double epsilon);

}  // namespace flowlab
