// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <utility>

#include "flowlab/data.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/schedule.hpp"

namespace flowlab {

// Time-dependent vector field v(x, t) on R^d.  Batch evaluation advances many
// states at a common time; the default falls back to one column at a time so
// implementations only need `at`.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Index dim() const = 0;
  virtual Vec at(const Vec& x, double t) const = 0;
  virtual void at_batch(const Mat& X, double t, Mat& out) const {
    out.resize(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) out.col(j) = at(X.col(j), t);
  }
};

// Wraps a plain callable as a VelocityField (used by tests and plugins).
class FunctionField : public VelocityField {
 public:
  FunctionField(Index d, std::function<Vec(const Vec&, double)> fn)
      : d_(d), fn_(std::move(fn)) {}
  Index dim() const override { return d_; }
  Vec at(const Vec& x, double t) const override { return fn_(x, t); }

 private:
  Index d_;
  std::function<Vec(const Vec&, double)> fn_;
};

// Velocity of the conditional path ending at x1:
//   u_t(x | x1) = (sigma'/sigma) (x - mu_t(x1)) + mu_t'(x1).
Vec conditional_velocity(const PathSchedule& sched, const Vec& x, const Vec& x1, double t);

// Posterior weights w_i(x) over the data points: softmax of the component
// log-likelihoods -||x - mu_t(y_i)||^2 / (2 sigma_t^2), evaluated with the
// max-logit subtraction so the 1/sigma^2 scale cannot overflow.
Vec softmax_weights(const PathSchedule& sched, const Vec& x, const DataMatrix& data, double t);

// Batched weights: column j holds the weights of sample X.col(j) at time
// ts(j).  The cross products Y^T X are formed once for the whole batch.
Mat softmax_weights_batch(const PathSchedule& sched, const Mat& X, const Vec& ts,
                          const DataMatrix& data);

// Velocity field generating the exact mixture marginal: the w-weighted
// average of the conditional velocities.
Vec optimal_velocity(const PathSchedule& sched, const Vec& x, const DataMatrix& data, double t);

class OptimalVelocityField : public VelocityField {
 public:
  OptimalVelocityField(PathSchedule sched, DataMatrix data)
      : sched_(std::move(sched)), data_(std::move(data)) {
    require(data_.count() > 0, "optimal field needs a non-empty dataset");
  }
  Index dim() const override { return data_.dim(); }
  Vec at(const Vec& x, double t) const override {
    return optimal_velocity(sched_, x, data_, t);
  }
  const DataMatrix& data() const { return data_; }
  const PathSchedule& schedule() const { return sched_; }

 private:
  PathSchedule sched_;
  DataMatrix data_;
};

// Exact mixture density (1/N) sum_i N(x; mu_t(y_i), sigma_t^2 I).
double marginal_logdensity(const PathSchedule& sched, const Vec& x, const DataMatrix& data,
                           double t);
double marginal_density(const PathSchedule& sched, const Vec& x, const DataMatrix& data,
                        double t);

// Exact draws from the mixture: pick a component uniformly, then its Gaussian.
Mat sample_marginal(const PathSchedule& sched, const DataMatrix& data, double t,
                    const RngSpec& spec, Index count);

// Mean and covariance of the mixture: m(t) ybar and sigma^2 I + m^2 S_Y with
// S_Y the population covariance of the data points.
std::pair<Vec, Mat> marginal_moments(const PathSchedule& sched, const DataMatrix& data, double t);

}  // namespace flowlab
