// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "flowlab/common.hpp"

namespace flowlab {

// Convex polytope given by its generators (one per column); the region is the
// convex hull of the columns.
struct ConvexRegion {
  Mat generators;  // d x m

  Index dim() const { return generators.rows(); }
  Index size() const { return generators.cols(); }
};

// Euclidean distance between two convex hulls.
//
// Solved as the min-norm point of the Minkowski difference conv{a_i - b_j},
// via Frank-Wolfe steps (the linear minimization splits over the two hulls,
// so the pair set is never enumerated) combined with exact minimization over
// the current active vertex set.  The certificate is the Frank-Wolfe gap:
// on exit |result - true distance| <= tol.  Overlapping hulls return 0.
// Iterations are capped at 10^4; hitting the cap without certifying the
// tolerance is an invariant failure.
double convex_distance(const ConvexRegion& a, const ConvexRegion& b, double tol = 1e-7);

// Hull of {(1-t) s + t c}: generators are all pairwise blends.  The generator
// product m_S * m_C is capped (default 10^5) to keep memory bounded.
ConvexRegion blend_region(const ConvexRegion& S, const ConvexRegion& C, double t,
                          Index cap = 100000);

// x belongs to the hull iff its distance to the hull is at most tol.
bool region_membership(const Vec& x, const ConvexRegion& region, double tol = 1e-6);

// Regular polygon/sphere proxy used where a ball-shaped source region is
// needed as a generator hull: d=1 gives {-r, r}, d=2 a regular n-gon, higher
// dimensions a deterministic unit-sphere sample scaled to radius r.
ConvexRegion ball_proxy(Index d, double radius, Index generators = 64);

}  // namespace flowlab
