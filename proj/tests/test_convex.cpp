// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "flowlab/common.hpp"
#include "flowlab/convex.hpp"
#include "flowlab/rng.hpp"

using namespace flowlab;

namespace {
ConvexRegion square(double cx, double cy, double half) {
  ConvexRegion r;
  r.generators.resize(2, 4);
  r.generators << cx - half, cx + half, cx + half, cx - half,
                  cy - half, cy - half, cy + half, cy + half;
  return r;
}
}  // namespace

TEST_CASE("distance between diagonal unit squares is 2 sqrt 2") {
  // Squares centered at (0,0) and (4,4) with half-width 1: the closest pair
  // of points is (1,1) and (3,3).
  ConvexRegion a = square(0.0, 0.0, 1.0);
  ConvexRegion b = square(4.0, 4.0, 1.0);
  double d = convex_distance(a, b);
  CHECK(d == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-7));
  CHECK(convex_distance(b, a) == doctest::Approx(d).epsilon(1e-9));
}

TEST_CASE("overlapping hulls have distance zero") {
  ConvexRegion a = square(0.0, 0.0, 1.0);
  ConvexRegion b = square(0.5, 0.5, 1.0);
  CHECK(convex_distance(a, b) == 0.0);
  // Containment is also overlap.
  ConvexRegion inner = square(0.0, 0.0, 0.25);
  CHECK(convex_distance(a, inner) == 0.0);
}

TEST_CASE("touching intervals in one dimension") {
  ConvexRegion a, b;
  a.generators.resize(1, 2);
  a.generators << -1.0, 0.0;
  b.generators.resize(1, 2);
  b.generators << 1.0, 2.0;
  CHECK(convex_distance(a, b) == doctest::Approx(1.0).epsilon(1e-9));
  b.generators << 0.0, 2.0;
  CHECK(convex_distance(a, b) == 0.0);
}

TEST_CASE("distance to a point inside and outside") {
  ConvexRegion a = square(0.0, 0.0, 1.0);
  ConvexRegion p;
  p.generators.resize(2, 1);
  p.generators << 3.0, 0.0;
  CHECK(convex_distance(a, p) == doctest::Approx(2.0).epsilon(1e-7));
  p.generators << 0.3, -0.4;
  CHECK(convex_distance(a, p) == 0.0);
}

TEST_CASE("distance is bounded below by every directional separation") {
  // For any unit direction u, dist(A, B) >= min_j <u, b_j> - max_i <u, a_i>.
  // Random hulls plus random directions give an independent lower-bound
  // oracle; the Frank-Wolfe answer must dominate all of them.
  CounterRng rng(RngSpec{51, 0});
  for (int rep = 0; rep < 10; ++rep) {
    ConvexRegion a, b;
    a.generators = sample_standard_gaussian(RngSpec{51, 10 + rep}, 3, 6);
    b.generators = sample_standard_gaussian(RngSpec{51, 20 + rep}, 3, 5);
    b.generators.colwise() += Vec::Constant(3, 4.0);
    double d = convex_distance(a, b, 1e-9);
    double best_lb = 0.0;
    for (int k = 0; k < 200; ++k) {
      Vec u(3);
      for (Index i = 0; i < 3; ++i) u(i) = rng.normal();
      u.normalize();
      double sep = (b.generators.transpose() * u).minCoeff() -
                   (a.generators.transpose() * u).maxCoeff();
      best_lb = std::max(best_lb, sep);
    }
    CHECK(d >= best_lb - 1e-8);
    // Any generator pair gives an upper bound.
    double ub = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < a.size(); ++i)
      for (Index j = 0; j < b.size(); ++j)
        ub = std::min(ub, (a.generators.col(i) - b.generators.col(j)).norm());
    CHECK(d <= ub + 1e-8);
    CHECK(d >= 0.0);
  }
}

TEST_CASE("blend region interpolates between source and cluster hulls") {
  ConvexRegion S = square(0.0, 0.0, 2.0);
  ConvexRegion C = square(10.0, 0.0, 1.0);
  ConvexRegion b0 = blend_region(S, C, 0.0);
  ConvexRegion b1 = blend_region(S, C, 1.0);
  CHECK(b0.size() == S.size() * C.size());
  // At t = 0 every generator is a source generator; at t = 1 a cluster one.
  for (Index j = 0; j < b0.size(); ++j) {
    CHECK(region_membership(b0.generators.col(j), S, 1e-9));
    CHECK(region_membership(b1.generators.col(j), C, 1e-9));
  }
  // At t = 1/2 the blend sits halfway: x-range is [-1+5, 1+5.5] = [4, 6.5].
  ConvexRegion bh = blend_region(S, C, 0.5);
  CHECK(bh.generators.row(0).minCoeff() == doctest::Approx(3.5));
  CHECK(bh.generators.row(0).maxCoeff() == doctest::Approx(6.5));
  // Membership property: (1-t) s + t c lies in the blend for random interior
  // convex combinations s and c.
  CounterRng rng(RngSpec{52, 0});
  for (int k = 0; k < 50; ++k) {
    auto hull_point = [&](const ConvexRegion& r) {
      Vec w(r.size());
      for (Index i = 0; i < r.size(); ++i) w(i) = rng.uniform();
      w /= w.sum();
      return Vec(r.generators * w);
    };
    Vec x = 0.5 * hull_point(S) + 0.5 * hull_point(C);
    CHECK(region_membership(x, bh, 1e-7));
  }
  CHECK_THROWS_AS(blend_region(S, C, 1.5), config_error);
  CHECK_THROWS_AS(blend_region(S, C, 0.5, 3), config_error);
}

TEST_CASE("membership test accepts hull points and rejects far points") {
  ConvexRegion a = square(1.0, 1.0, 1.0);
  Vec inside(2), edge(2), outside(2);
  inside << 1.0, 1.0;
  edge << 2.0, 2.0;
  outside << 3.01, 1.0;
  CHECK(region_membership(inside, a));
  CHECK(region_membership(edge, a));
  CHECK_FALSE(region_membership(outside, a));
}

TEST_CASE("ball proxy shapes") {
  ConvexRegion seg = ball_proxy(1, 3.0);
  REQUIRE(seg.size() == 2);
  CHECK(seg.generators.minCoeff() == doctest::Approx(-3.0));
  CHECK(seg.generators.maxCoeff() == doctest::Approx(3.0));

  ConvexRegion poly = ball_proxy(2, 2.0, 128);
  REQUIRE(poly.size() == 128);
  for (Index j = 0; j < poly.size(); ++j) {
    CHECK(poly.generators.col(j).norm() == doctest::Approx(2.0).epsilon(1e-12));
  }
  // The origin is deep inside; a point just outside the radius is not member.
  CHECK(region_membership(Vec::Zero(2), poly));
  Vec far(2);
  far << 2.1, 0.0;
  CHECK_FALSE(region_membership(far, poly));

  ConvexRegion cloud = ball_proxy(5, 1.5, 64);
  REQUIRE(cloud.size() == 64);
  for (Index j = 0; j < cloud.size(); ++j) {
    CHECK(cloud.generators.col(j).norm() == doctest::Approx(1.5).epsilon(1e-12));
  }
  // Deterministic: same call, same generators.
  ConvexRegion cloud2 = ball_proxy(5, 1.5, 64);
  CHECK(cloud2.generators == cloud.generators);
}
