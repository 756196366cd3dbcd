// SPDX-License-Identifier: Apache-2.0
#include "flowlab/convex.hpp"

#include <cmath>
#include <vector>

#include "flowlab/rng.hpp"

namespace flowlab {

namespace {

constexpr int kMaxIter = 10000;

// Linear minimization oracle over the Minkowski difference: the vertex
// a_{i*} - b_{j*} minimizing <w, a_i - b_j> splits into independent searches
// over the two hulls.
Vec lmo(const Mat& A, const Mat& B, const Vec& w, Index& i_star, Index& j_star) {
  (A.transpose() * w).minCoeff(&i_star);
  (B.transpose() * w).maxCoeff(&j_star);
  return A.col(i_star) - B.col(j_star);
}

}  // namespace

double convex_distance(const ConvexRegion& a, const ConvexRegion& b, double tol) {
  require(a.size() > 0 && b.size() > 0, "convex_distance: empty region");
  require(a.dim() == b.dim(), "convex_distance: regions live in different dimensions");
  require(tol > 0.0, "convex_distance: tol must be positive");
  const Mat& A = a.generators;
  const Mat& B = b.generators;
  const Index d = A.rows();

  // Active set S of difference vertices with convex weights alpha; x = S alpha
  // is the current candidate.  Minor cycles re-solve the min-norm point over
  // the affine hull of S exactly (Caratheodory keeps |S| <= d+1 after drops).
  std::vector<Vec> S;
  std::vector<double> alpha;
  Index i0, j0;
  S.push_back(lmo(A, B, Vec::Zero(d).eval(), i0, j0));
  alpha.push_back(1.0);
  Vec x = S[0];

  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double xx = x.squaredNorm();
    if (xx <= tol * tol) return 0.0;  // hulls overlap within tolerance

    Index is, js;
    const Vec v = lmo(A, B, x, is, js);
    const double gap = xx - x.dot(v);
    // ||x|| - d* <= gap / ||x||, so this certifies the requested tolerance.
    if (gap <= tol * std::sqrt(xx)) return std::sqrt(xx);

    S.push_back(v);
    alpha.push_back(0.0);

    // Minor cycles: move toward the affine min-norm point, clipping at the
    // simplex boundary and dropping vertices that hit weight zero.
    for (int minor = 0; minor < kMaxIter; ++minor) {
      const Index k = static_cast<Index>(S.size());
      Mat G(k, k);
      for (Index r = 0; r < k; ++r)
        for (Index c = r; c < k; ++c) G(r, c) = G(c, r) = S[r].dot(S[c]);
      // min beta^T G beta subject to sum(beta) = 1; regularize the normal
      // equations slightly to survive affinely dependent vertex sets.
      Mat K = G + 1e-12 * G.trace() * Mat::Identity(k, k);
      Vec ones = Vec::Ones(k);
      Vec beta = K.ldlt().solve(ones);
      beta /= beta.sum();

      bool interior = true;
      for (Index r = 0; r < k; ++r) interior = interior && beta(r) > 1e-14;
      if (interior) {
        for (Index r = 0; r < k; ++r) alpha[r] = beta(r);
        break;
      }
      // Step from alpha toward beta until the first weight reaches zero.
      double theta = 1.0;
      for (Index r = 0; r < k; ++r)
        if (beta(r) < 1e-14) theta = std::min(theta, alpha[r] / (alpha[r] - beta(r)));
      std::vector<Vec> S2;
      std::vector<double> a2;
      for (Index r = 0; r < k; ++r) {
        const double w = alpha[r] + theta * (beta(r) - alpha[r]);
        if (w > 1e-14) {
          S2.push_back(S[r]);
          a2.push_back(w);
        }
      }
      if (S2.empty()) {  // fully degenerate; keep the best single vertex
        S2.push_back(S.back());
        a2.push_back(1.0);
      }
      S.swap(S2);
      alpha.swap(a2);
      double total = 0.0;
      for (double w : alpha) total += w;
      for (double& w : alpha) w /= total;
    }

    x.setZero();
    for (size_t r = 0; r < S.size(); ++r) x += alpha[r] * S[r];
  }
  throw invariant_error("convex_distance: iteration cap reached before certifying tol=" +
                        fmt17(tol));
}

ConvexRegion blend_region(const ConvexRegion& S, const ConvexRegion& C, double t, Index cap) {
  require(S.dim() == C.dim(), "blend_region: regions live in different dimensions");
  require(S.size() > 0 && C.size() > 0, "blend_region: empty region");
  require(t >= 0.0 && t <= 1.0, "blend_region: t must lie in [0,1]");
  const Index m = S.size() * C.size();
  require(m <= cap, "blend_region: generator product " + std::to_string(m) +
                        " exceeds cap " + std::to_string(cap));
  ConvexRegion out;
  out.generators.resize(S.dim(), m);
  Index col = 0;
  for (Index i = 0; i < S.size(); ++i)
    for (Index j = 0; j < C.size(); ++j)
      out.generators.col(col++) = (1.0 - t) * S.generators.col(i) + t * C.generators.col(j);
  return out;
}

bool region_membership(const Vec& x, const ConvexRegion& region, double tol) {
  ConvexRegion point;
  point.generators = x;
  return convex_distance(point, region, std::min(tol * 0.5, 1e-7)) <= tol;
}

ConvexRegion ball_proxy(Index d, double radius, Index generators) {
  require(d >= 1, "ball_proxy: dimension must be >= 1");
  require(radius > 0.0, "ball_proxy: radius must be positive");
  ConvexRegion out;
  if (d == 1) {
    out.generators.resize(1, 2);
    out.generators << -radius, radius;
    return out;
  }
  if (d == 2) {
    out.generators.resize(2, generators);
    for (Index k = 0; k < generators; ++k) {
      const double a = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(generators);
      out.generators(0, k) = radius * std::cos(a);
      out.generators(1, k) = radius * std::sin(a);
    }
    return out;
  }
  // Fixed-seed directions on the sphere; deterministic across runs.
  Mat dirs = sample_standard_gaussian(RngSpec{0x5eedball, 0}, d, generators);
  out.generators.resize(d, generators);
  for (Index k = 0; k < generators; ++k)
    out.generators.col(k) = radius * dirs.col(k).normalized();
  return out;
}

}  // namespace flowlab
