// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "flowlab/convex.hpp"
#include "flowlab/data.hpp"
#include "flowlab/integrate.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

// Two-level family of convex regions: leaves grouped into clusters, plus a
// bounded convex source region.  Leaves must be pairwise disjoint and so must
// the group hulls (validate_hierarchy checks both).
struct HierarchySpec {
  ConvexRegion source;
  std::vector<std::vector<ConvexRegion>> leaves;  // leaves[i][j] = leaf j of group i

  Index group_count() const { return static_cast<Index>(leaves.size()); }
  Index leaf_count() const;
};

// Hull of all generators of group i's leaves.
ConvexRegion group_region(const HierarchySpec& spec, Index i);

// JSON layout: {"S": [[..]], "groups": [{"leaves": [[[..]], ...]}, ...]}
// where every region is a list of generator points (rows).
HierarchySpec hierarchy_from_json(const std::string& text);
std::string hierarchy_to_json(const HierarchySpec& spec);
HierarchySpec load_hierarchy(const std::string& path);
void save_hierarchy(const HierarchySpec& spec, const std::string& path);

// Throws unless leaves are pairwise disjoint and group hulls are pairwise
// disjoint (hull distance > gap_tol).
void validate_hierarchy(const HierarchySpec& spec, double gap_tol = 1e-9);

// Upper bound on the probability that no posterior weight exceeds tau when
// x ~ p_t, for data with pairwise separation at least M:
//   (1/sqrt(2 pi)) * ((1-t)/t) * (1/M) * log(tau (N-1) / (1-tau)) * N (N-1).
// The value is a bound, not a probability; it may exceed 1.
double concentration_bound(double t, double tau, double M, Index N);

struct NonconcentrationEstimate {
  double p_hat = 0.0;    // Monte-Carlo frequency of max_i w_i(x) <= tau
  double std_err = 0.0;  // binomial standard error sqrt(p (1-p) / n)
  Index samples = 0;
};

// Draws `samples` points from the straight-path mixture at time t and counts
// how often the largest posterior weight stays at or below tau.  Sample j and
// its weight evaluation live in slot j, so the estimate is identical for any
// thread count.
NonconcentrationEstimate estimate_nonconcentration(double t, double tau, const DataMatrix& data,
                                                   Index samples, const RngSpec& rng,
                                                   int threads = 1);

// Minimum pairwise Euclidean distance between data points (N >= 2).
double min_separation(const DataMatrix& data);

// g(t): the smallest hull distance over all pairs of blended regions
// (1-t) S + t C_i.  Zero while the blends still touch, positive afterwards.
double blend_gap(const ConvexRegion& S, const std::vector<ConvexRegion>& regions, double t,
                 double dist_tol = 1e-7);

// Largest t at which two blended regions still touch, located by bisection to
// width tol.  Uses the fact that {t : g(t) = 0} is a closed interval starting
// at 0, so a single sign change separates touching from separated.  Regions
// must already be disjoint at t = 1.
double separation_time(const ConvexRegion& S, const std::vector<ConvexRegion>& regions,
                       double tol = 1e-4, double touch_tol = 1e-6);

enum class HierarchyLevel { Group, Leaf };

// Region-confinement audit of one trajectory: find the blended region that
// contains the state at the first grid node >= t_from, then require every
// later state to stay inside the correspondingly blended region.
struct ConfinementReport {
  HierarchyLevel level = HierarchyLevel::Group;
  double t_from = 0.0;
  Index node_from = -1;          // first grid node with time >= t_from
  Index owner_group = -1;        // containing group (or group of the owning leaf)
  Index owner_leaf = -1;         // leaf index within the group (leaf level only)
  bool out_of_support = false;   // no region contains the state at node_from
  double entry_distance = 0.0;   // distance to the nearest blended region at node_from
  bool confined = false;
  std::vector<Index> violation_nodes;   // grid nodes whose state left the region
  double max_violation_distance = 0.0;  // largest excursion over the violations
};

ConfinementReport confinement_check(const Trajectory& traj, const HierarchySpec& spec,
                                    double t_from, HierarchyLevel level, double tol = 1e-6);

std::string report_to_json(const ConfinementReport& report);

}  // namespace flowlab
