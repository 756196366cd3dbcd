// SPDX-License-Identifier: Apache-2.0
#include "flowlab/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "flowlab/io.hpp"
#include "flowlab/json_util.hpp"
#include "flowlab/parallel.hpp"
#include "flowlab/velocity.hpp"

namespace flowlab {

Index HierarchySpec::leaf_count() const {
  Index n = 0;
  for (const auto& group : leaves) n += static_cast<Index>(group.size());
  return n;
}

ConvexRegion group_region(const HierarchySpec& spec, Index i) {
  require(i >= 0 && i < spec.group_count(), "group index out of range");
  const auto& group = spec.leaves[static_cast<size_t>(i)];
  require(!group.empty(), "group " + std::to_string(i) + " has no leaves");
  Index total = 0;
  for (const auto& leaf : group) total += leaf.size();
  ConvexRegion out;
  out.generators.resize(group[0].dim(), total);
  Index col = 0;
  for (const auto& leaf : group) {
    out.generators.middleCols(col, leaf.size()) = leaf.generators;
    col += leaf.size();
  }
  return out;
}

namespace {

// Regions are stored as lists of generator points (rows), matching the
// dataset JSON convention; internally generators are columns.
ConvexRegion region_from_rows(const nlohmann::json& rows, const std::string& name) {
  ConvexRegion region;
  region.generators = matrix_from_rows(rows, name).transpose();
  return region;
}

nlohmann::json region_to_rows(const ConvexRegion& region) {
  return matrix_rows(region.generators.transpose());
}

}  // namespace

HierarchySpec hierarchy_from_json(const std::string& text) {
  nlohmann::json j = parse_json(text, "hierarchy");
  require(j.contains("S") && j.contains("groups"), "hierarchy JSON must contain S and groups");
  HierarchySpec spec;
  spec.source = region_from_rows(j["S"], "S");
  require(j["groups"].is_array() && !j["groups"].empty(), "hierarchy groups must be a non-empty array");
  for (size_t i = 0; i < j["groups"].size(); ++i) {
    const auto& g = j["groups"][i];
    require(g.contains("leaves") && g["leaves"].is_array() && !g["leaves"].empty(),
            "hierarchy group " + std::to_string(i + 1) + " needs a non-empty leaves array");
    std::vector<ConvexRegion> group;
    for (size_t l = 0; l < g["leaves"].size(); ++l) {
      group.push_back(region_from_rows(
          g["leaves"][l], "groups[" + std::to_string(i) + "].leaves[" + std::to_string(l) + "]"));
      require(group.back().dim() == spec.source.dim(),
              "hierarchy leaf dimension differs from S");
    }
    spec.leaves.push_back(std::move(group));
  }
  return spec;
}

std::string hierarchy_to_json(const HierarchySpec& spec) {
  nlohmann::json j;
  j["S"] = region_to_rows(spec.source);
  j["groups"] = nlohmann::json::array();
  for (const auto& group : spec.leaves) {
    nlohmann::json g;
    g["leaves"] = nlohmann::json::array();
    for (const auto& leaf : group) g["leaves"].push_back(region_to_rows(leaf));
    j["groups"].push_back(std::move(g));
  }
  return j.dump(2) + "\n";
}

HierarchySpec load_hierarchy(const std::string& path) {
  return hierarchy_from_json(read_file(path));
}

void save_hierarchy(const HierarchySpec& spec, const std::string& path) {
  write_file(path, hierarchy_to_json(spec));
}

void validate_hierarchy(const HierarchySpec& spec, double gap_tol) {
  require(spec.source.size() > 0, "hierarchy source region is empty");
  std::vector<ConvexRegion> flat;
  for (const auto& group : spec.leaves)
    for (const auto& leaf : group) flat.push_back(leaf);
  for (size_t a = 0; a < flat.size(); ++a)
    for (size_t b = a + 1; b < flat.size(); ++b)
      check(convex_distance(flat[a], flat[b]) > gap_tol,
            "hierarchy leaves " + std::to_string(a) + " and " + std::to_string(b) +
                " are not disjoint");
  for (Index i = 0; i < spec.group_count(); ++i)
    for (Index k = i + 1; k < spec.group_count(); ++k)
      check(convex_distance(group_region(spec, i), group_region(spec, k)) > gap_tol,
            "hierarchy groups " + std::to_string(i) + " and " + std::to_string(k) +
                " are not disjoint");
}

double concentration_bound(double t, double tau, double M, Index N) {
  require(t > 0.0 && t < 1.0, "concentration_bound: t must lie in (0,1)");
  require(N >= 2, "concentration_bound: N must be at least 2");
  require(M > 0.0, "concentration_bound: separation M must be positive");
  const double n = static_cast<double>(N);
  require(tau > 1.0 / n && tau < 1.0,
          "concentration_bound: tau must lie in (1/N, 1); the largest weight always "
          "reaches 1/N, so smaller thresholds carry no information");
  const double log_term = std::log(tau * (n - 1.0) / (1.0 - tau));
  return (1.0 / std::sqrt(2.0 * M_PI)) * ((1.0 - t) / t) * (1.0 / M) * log_term * n * (n - 1.0);
}

NonconcentrationEstimate estimate_nonconcentration(double t, double tau, const DataMatrix& data,
                                                   Index samples, const RngSpec& rng,
                                                   int threads) {
  require(t > 0.0 && t < 1.0, "estimate_nonconcentration: t must lie in (0,1)");
  require(samples >= 1, "estimate_nonconcentration: need at least one sample");
  const PathSchedule sched = PathSchedule::ot();
  const Mat X = sample_marginal(sched, data, t, rng, samples);
  std::vector<unsigned char> hit(static_cast<size_t>(samples), 0);
  parallel_for(samples, threads, [&](std::int64_t j) {
    const Vec w = softmax_weights(sched, X.col(static_cast<Index>(j)), data, t);
    hit[static_cast<size_t>(j)] = w.maxCoeff() <= tau ? 1 : 0;
  });
  double count = 0.0;
  for (Index j = 0; j < samples; ++j) count += hit[static_cast<size_t>(j)];
  NonconcentrationEstimate est;
  est.samples = samples;
  est.p_hat = count / static_cast<double>(samples);
  est.std_err = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(samples));
  return est;
}

double min_separation(const DataMatrix& data) {
  require(data.count() >= 2, "min_separation: need at least two points");
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < data.count(); ++i)
    for (Index j = i + 1; j < data.count(); ++j)
      best = std::min(best, (data.points.col(i) - data.points.col(j)).norm());
  return best;
}

double blend_gap(const ConvexRegion& S, const std::vector<ConvexRegion>& regions, double t,
                 double dist_tol) {
  require(regions.size() >= 2, "blend_gap: need at least two regions");
  std::vector<ConvexRegion> blends;
  blends.reserve(regions.size());
  for (const auto& region : regions) blends.push_back(blend_region(S, region, t));
  double gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < blends.size(); ++i)
    for (size_t j = i + 1; j < blends.size(); ++j)
      gap = std::min(gap, convex_distance(blends[i], blends[j], dist_tol));
  return gap;
}

double separation_time(const ConvexRegion& S, const std::vector<ConvexRegion>& regions,
                       double tol, double touch_tol) {
  require(tol > 0.0, "separation_time: tol must be positive");
  require(blend_gap(S, regions, 1.0) > touch_tol,
          "separation_time: regions are not disjoint at t = 1");
  // The touching times form a closed interval [0, t1]: at t = 0 every blend
  // equals S, and disjointness at t = 1 is checked above.  Bisect the single
  // transition.
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (blend_gap(S, regions, mid) <= touch_tol)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ConfinementReport confinement_check(const Trajectory& traj, const HierarchySpec& spec,
                                    double t_from, HierarchyLevel level, double tol) {
  const Index n = traj.times.size();
  require(n >= 1 && traj.states.cols() == n, "confinement_check: malformed trajectory");

  ConfinementReport report;
  report.level = level;
  report.t_from = t_from;

  Index node_from = -1;
  for (Index k = 0; k < n; ++k) {
    if (traj.times(k) >= t_from - 1e-12) {
      node_from = k;
      break;
    }
  }
  require(node_from >= 0, "confinement_check: no grid node at or after t_from");
  report.node_from = node_from;

  // Collect the candidate regions at the requested level.
  struct Labeled {
    ConvexRegion region;
    Index group;
    Index leaf;
  };
  std::vector<Labeled> candidates;
  if (level == HierarchyLevel::Group) {
    for (Index i = 0; i < spec.group_count(); ++i)
      candidates.push_back({group_region(spec, i), i, -1});
  } else {
    for (Index i = 0; i < spec.group_count(); ++i)
      for (size_t l = 0; l < spec.leaves[static_cast<size_t>(i)].size(); ++l)
        candidates.push_back(
            {spec.leaves[static_cast<size_t>(i)][l], i, static_cast<Index>(l)});
  }

  // Owner = region whose blend contains the state at node_from (nearest if
  // several touch within tolerance).
  const double t0 = traj.times(node_from);
  ConvexRegion state;
  state.generators = traj.states.col(node_from);
  Index owner = -1;
  double best = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < candidates.size(); ++c) {
    const double dist =
        convex_distance(state, blend_region(spec.source, candidates[c].region, t0));
    if (dist < best) {
      best = dist;
      owner = static_cast<Index>(c);
    }
  }
  report.entry_distance = best;
  if (best > tol) {
    report.out_of_support = true;
    report.confined = false;
    return report;
  }
  report.owner_group = candidates[static_cast<size_t>(owner)].group;
  report.owner_leaf = candidates[static_cast<size_t>(owner)].leaf;

  const ConvexRegion& target = candidates[static_cast<size_t>(owner)].region;
  for (Index k = node_from + 1; k < n; ++k) {
    ConvexRegion xk;
    xk.generators = traj.states.col(k);
    const double dist = convex_distance(xk, blend_region(spec.source, target, traj.times(k)));
    if (dist > tol) {
      report.violation_nodes.push_back(k);
      report.max_violation_distance = std::max(report.max_violation_distance, dist);
    }
  }
  report.confined = report.violation_nodes.empty();
  return report;
}

std::string report_to_json(const ConfinementReport& report) {
  nlohmann::json j;
  j["level"] = report.level == HierarchyLevel::Group ? "group" : "leaf";
  j["t_from"] = report.t_from;
  j["node_from"] = report.node_from;
  j["owner_group"] = report.owner_group;
  j["owner_leaf"] = report.owner_leaf;
  j["out_of_support"] = report.out_of_support;
  j["entry_distance"] = report.entry_distance;
  j["confined"] = report.confined;
  j["violation_nodes"] = report.violation_nodes;
  j["max_violation_distance"] = report.max_violation_distance;
  return j.dump(2) + "\n";
}

}  // namespace flowlab
