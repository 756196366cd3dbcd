// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "flowlab/common.hpp"

namespace flowlab {

// Conditional Gaussian path x_t | x1 ~ N(mu_t(x1), sigma_t^2 I) on t in [0,1).
// The mean is linear in x1 for every built-in kind, so mu is represented by a
// scalar coefficient m(t) with mu_t(x1) = m(t) * x1.  Custom schedules supply
// m, sigma and their derivatives directly.
struct PathSchedule {
  enum class Kind { OT, VP, Custom };

  Kind kind = Kind::OT;
  double beta0 = 1.0;  // constant-rate parameter of the VP kind

  std::function<double(double)> m_fn, dm_fn, sigma_fn, dsigma_fn;

  static PathSchedule ot();
  // Variance-preserving schedule with constant rate beta(s) = beta0:
  //   alpha(u) = exp(-beta0 u / 2), mu_t = alpha(1-t) x1, sigma_t^2 = 1 - alpha(1-t)^2.
  static PathSchedule vp(double beta0 = 1.0);
  static PathSchedule custom(std::function<double(double)> m,
                             std::function<double(double)> dm,
                             std::function<double(double)> sigma,
                             std::function<double(double)> dsigma);

  double m(double t) const;
  double dm(double t) const;
  double sigma(double t) const;    // must be positive on [0,1)
  double dsigma(double t) const;

  // Largest |analytic - central difference| over probe points; used to vet
  // custom schedules before they are integrated.
  double derivative_fd_error(double h = 1e-6) const;

  std::string kind_name() const;
};

void require_time_in_unit(double t);  // t must lie in [0, 1)

}  // namespace flowlab
