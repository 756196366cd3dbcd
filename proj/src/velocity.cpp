// SPDX-License-Identifier: Apache-2.0
#include "flowlab/velocity.hpp"

#include <cmath>

namespace flowlab {

Vec conditional_velocity(const PathSchedule& sched, const Vec& x, const Vec& x1, double t) {
  require_time_in_unit(t);
  require(x.size() == x1.size(), "conditional_velocity: x and x1 dimensions differ");
  const double s = sched.sigma(t);
  return (sched.dsigma(t) / s) * (x - sched.m(t) * x1) + sched.dm(t) * x1;
}

namespace {

// Component log-likelihood exponents (without the shared normalizer):
// l_i = -||x - m y_i||^2 / (2 sigma^2).
Vec logits(const PathSchedule& sched, const Vec& x, const DataMatrix& data, double t) {
  const double m = sched.m(t);
  const double s = sched.sigma(t);
  const Index n = data.count();
  Vec l(n);
  for (Index i = 0; i < n; ++i)
    l(i) = -(x - m * data.points.col(i)).squaredNorm() / (2.0 * s * s);
  return l;
}

}  // namespace

Vec softmax_weights(const PathSchedule& sched, const Vec& x, const DataMatrix& data, double t) {
  require_time_in_unit(t);
  require(x.size() == data.dim(), "softmax_weights: x dimension does not match the data");
  require(data.count() > 0, "softmax_weights: empty dataset");
  Vec l = logits(sched, x, data, t);
  const double peak = l.maxCoeff();
  Vec w = (l.array() - peak).exp();
  w /= w.sum();
  return w;
}

Mat softmax_weights_batch(const PathSchedule& sched, const Mat& X, const Vec& ts,
                          const DataMatrix& data) {
  require(X.rows() == data.dim(), "softmax_weights_batch: sample dimension mismatch");
  require(X.cols() == ts.size(), "softmax_weights_batch: one time per sample required");
  require(data.count() > 0, "softmax_weights_batch: empty dataset");
  const Index n = data.count();
  const Mat cross = data.points.transpose() * X;  // (i, j) = <y_i, x_j>
  const Vec ysq = data.points.colwise().squaredNorm();
  Mat W(n, X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const double t = ts(j);
    require_time_in_unit(t);
    const double m = sched.m(t);
    const double s = sched.sigma(t);
    const double xsq = X.col(j).squaredNorm();
    // -||x - m y_i||^2 = -(||x||^2 - 2 m <y_i, x> + m^2 ||y_i||^2)
    Vec l = (2.0 * m * cross.col(j) - m * m * ysq).array() - xsq;
    l /= 2.0 * s * s;
    const double peak = l.maxCoeff();
    W.col(j) = (l.array() - peak).exp();
    W.col(j) /= W.col(j).sum();
  }
  return W;
}

Vec optimal_velocity(const PathSchedule& sched, const Vec& x, const DataMatrix& data, double t) {
  const Vec w = softmax_weights(sched, x, data, t);
  const Vec ybar = data.points * w;
  if (sched.kind == PathSchedule::Kind::OT) return (ybar - x) / (1.0 - t);
  const double s = sched.sigma(t);
  const double ratio = sched.dsigma(t) / s;
  return ratio * x + (sched.dm(t) - ratio * sched.m(t)) * ybar;
}

double marginal_logdensity(const PathSchedule& sched, const Vec& x, const DataMatrix& data,
                           double t) {
  require_time_in_unit(t);
  require(x.size() == data.dim(), "marginal_density: x dimension does not match the data");
  const Index n = data.count();
  require(n > 0, "marginal_density: empty dataset");
  const double s = sched.sigma(t);
  const double d = static_cast<double>(data.dim());
  Vec l = logits(sched, x, data, t);
  const double peak = l.maxCoeff();
  const double acc = (l.array() - peak).exp().sum();
  constexpr double kLogTwoPi = 1.8378770664093454836;
  return peak + std::log(acc) - std::log(static_cast<double>(n)) -
         0.5 * d * kLogTwoPi - d * std::log(s);
}

double marginal_density(const PathSchedule& sched, const Vec& x, const DataMatrix& data,
                        double t) {
  return std::exp(marginal_logdensity(sched, x, data, t));
}

Mat sample_marginal(const PathSchedule& sched, const DataMatrix& data, double t,
                    const RngSpec& spec, Index count) {
  require_time_in_unit(t);
  require(count > 0, "sample_marginal: count must be positive");
  const double m = sched.m(t);
  const double s = sched.sigma(t);
  const Index d = data.dim();
  Mat out(d, count);
  for (Index j = 0; j < count; ++j) {
    CounterRng rng(substream(spec, static_cast<std::uint64_t>(j)));
    const Index comp = static_cast<Index>(rng.uniform_index(data.count()));
    for (Index i = 0; i < d; ++i) out(i, j) = m * data.points(i, comp) + s * rng.normal();
  }
  return out;
}

std::pair<Vec, Mat> marginal_moments(const PathSchedule& sched, const DataMatrix& data,
                                     double t) {
  require_time_in_unit(t);
  const Index n = data.count();
  require(n > 0, "marginal_moments: empty dataset");
  const double m = sched.m(t);
  const double s = sched.sigma(t);
  const Vec ybar = data.points.rowwise().mean();
  Mat centered = data.points.colwise() - ybar;
  Mat cov_y = centered * centered.transpose() / static_cast<double>(n);
  Mat cov = (s * s) * Mat::Identity(data.dim(), data.dim()) + (m * m) * cov_y;
  return {m * ybar, std::move(cov)};
}

}  // namespace flowlab
