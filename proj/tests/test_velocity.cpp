// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "flowlab/data.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/schedule.hpp"
#include "flowlab/velocity.hpp"

using namespace flowlab;

namespace {
// Direct re-derivation of the field: weighted average of conditional
// velocities with softmax weights computed in long double from raw logits.
Vec reference_velocity(const PathSchedule& s, const Vec& x, const DataMatrix& data,
                       double t) {
  const Index n = data.count();
  std::vector<long double> logits(static_cast<size_t>(n));
  const long double sig = s.sigma(t);
  for (Index i = 0; i < n; ++i) {
    Vec diff = x - s.m(t) * data.points.col(i);
    logits[static_cast<size_t>(i)] =
        -static_cast<long double>(diff.squaredNorm()) / (2.0L * sig * sig);
  }
  long double mx = logits[0];
  for (long double l : logits) mx = std::max(mx, l);
  long double z = 0.0L;
  for (long double l : logits) z += std::exp(l - mx);
  Vec v = Vec::Zero(x.size());
  for (Index i = 0; i < n; ++i) {
    double w = static_cast<double>(std::exp(logits[static_cast<size_t>(i)] - mx) / z);
    v += w * conditional_velocity(s, x, data.points.col(i), t);
  }
  return v;
}
}  // namespace

TEST_CASE("single data point reduces to the conditional velocity") {
  Mat pts(3, 1);
  pts.col(0) << 1.0, -2.0, 0.5;
  DataMatrix data{pts};
  PathSchedule s = PathSchedule::ot();
  CounterRng rng(RngSpec{31, 0});
  for (int k = 0; k < 20; ++k) {
    Vec x(3);
    for (Index i = 0; i < 3; ++i) x(i) = rng.normal();
    double t = rng.uniform(0.0, 0.99);
    Vec v = optimal_velocity(s, x, data, t);
    // Straight path toward the unique endpoint: (y - x) / (1 - t).
    Vec expected = (pts.col(0) - x) / (1.0 - t);
    CHECK((v - expected).norm() < 1e-10 * (1.0 + expected.norm()));
    Vec w = softmax_weights(s, x, data, t);
    REQUIRE(w.size() == 1);
    CHECK(w(0) == 1.0);
  }
}

TEST_CASE("single point under the variance-preserving path") {
  Mat pts(2, 1);
  pts.col(0) << 0.7, -1.1;
  DataMatrix data{pts};
  const double beta0 = 2.0;
  PathSchedule s = PathSchedule::vp(beta0);
  Vec x(2);
  x << 0.3, 0.4;
  double t = 0.6;
  Vec v = optimal_velocity(s, x, data, t);
  Vec expected = (s.dsigma(t) / s.sigma(t)) * (x - s.m(t) * pts.col(0)) +
                 s.dm(t) * pts.col(0);
  CHECK((v - expected).norm() < 1e-12);
}

TEST_CASE("posterior weights form a probability vector") {
  DataMatrix data = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{1, 100});
  PathSchedule s = PathSchedule::ot();
  CounterRng rng(RngSpec{32, 0});
  for (int k = 0; k < 200; ++k) {
    Vec x(2);
    for (Index i = 0; i < 2; ++i) x(i) = rng.uniform(-12.0, 12.0);
    double t = rng.uniform(0.0, 0.999);
    Vec w = softmax_weights(s, x, data, t);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("weights stay finite arbitrarily close to the terminal time") {
  DataMatrix data = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{1, 100});
  PathSchedule s = PathSchedule::ot();
  Vec x = 0.9999 * data.points.col(2);
  for (double t : {0.9, 0.999, 0.999999, 1.0 - 1e-12}) {
    Vec w = softmax_weights(s, x, data, t);
    CHECK(std::isfinite(w.sum()));
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  }
  // At t -> 1 near a scaled copy of point 2, all mass collapses onto it.
  Vec w = softmax_weights(s, x, data, 1.0 - 1e-9);
  CHECK(w(2) > 1.0 - 1e-12);
}

TEST_CASE("field matches an independent recomputation") {
  DataMatrix data = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{1, 100});
  for (const PathSchedule& s : {PathSchedule::ot(), PathSchedule::vp(1.3)}) {
    CounterRng rng(RngSpec{33, 0});
    for (int k = 0; k < 100; ++k) {
      Vec x(2);
      for (Index i = 0; i < 2; ++i) x(i) = rng.uniform(-11.0, 11.0);
      double t = rng.uniform(0.0, 0.995);
      Vec v = optimal_velocity(s, x, data, t);
      Vec ref = reference_velocity(s, x, data, t);
      CHECK((v - ref).norm() < 1e-9 * (1.0 + ref.norm()));
    }
  }
}

TEST_CASE("symmetric data gives zero velocity at the symmetry point") {
  Mat pts(1, 2);
  pts << -1.0, 1.0;
  DataMatrix data{pts};
  PathSchedule s = PathSchedule::ot();
  Vec x = Vec::Zero(1);
  for (double t : {0.1, 0.5, 0.9}) {
    CHECK(std::abs(optimal_velocity(s, x, data, t)(0)) < 1e-14);
  }
}

TEST_CASE("batched weights agree with per-sample weights") {
  DataMatrix data = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{1, 100});
  PathSchedule s = PathSchedule::ot();
  Mat X = sample_standard_gaussian(RngSpec{34, 0}, 2, 50);
  Vec ts(50);
  CounterRng rng(RngSpec{34, 1});
  for (Index j = 0; j < 50; ++j) ts(j) = rng.uniform(0.0, 0.999);
  Mat W = softmax_weights_batch(s, X, ts, data);
  REQUIRE(W.rows() == 6);
  REQUIRE(W.cols() == 50);
  for (Index j = 0; j < 50; ++j) {
    Vec w = softmax_weights(s, X.col(j), data, ts(j));
    CHECK((W.col(j) - w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("field object delegates to the free function") {
  DataMatrix data = sparse_square_dataset(4, 10.0, 5.0, 2, RngSpec{35, 0});
  PathSchedule s = PathSchedule::ot();
  OptimalVelocityField field(s, data);
  CHECK(field.dim() == 2);
  Vec x(2);
  x << 0.25, -0.75;
  CHECK((field.at(x, 0.3) - optimal_velocity(s, x, data, 0.3)).norm() == 0.0);
  Mat X = sample_standard_gaussian(RngSpec{35, 1}, 2, 7);
  Mat out;
  field.at_batch(X, 0.3, out);
  for (Index j = 0; j < 7; ++j) {
    CHECK((out.col(j) - field.at(X.col(j), 0.3)).norm() < 1e-12);
  }
}
