// SPDX-License-Identifier: Apache-2.0
#include "flowlab/schedule.hpp"

#include <cmath>

namespace flowlab {

void require_time_in_unit(double t) {
  require(t >= 0.0 && t < 1.0, "time must lie in [0, 1), got " + fmt17(t));
}

PathSchedule PathSchedule::ot() {
  PathSchedule s;
  s.kind = Kind::OT;
  return s;
}

PathSchedule PathSchedule::vp(double beta0) {
  require(beta0 > 0.0, "vp schedule: beta0 must be positive");
  PathSchedule s;
  s.kind = Kind::VP;
  s.beta0 = beta0;
  return s;
}

PathSchedule PathSchedule::custom(std::function<double(double)> m,
                                  std::function<double(double)> dm,
                                  std::function<double(double)> sigma,
                                  std::function<double(double)> dsigma) {
  require(m && dm && sigma && dsigma, "custom schedule: all four callables are required");
  PathSchedule s;
  s.kind = Kind::Custom;
  s.m_fn = std::move(m);
  s.dm_fn = std::move(dm);
  s.sigma_fn = std::move(sigma);
  s.dsigma_fn = std::move(dsigma);
  return s;
}

double PathSchedule::m(double t) const {
  switch (kind) {
    case Kind::OT: return t;
    case Kind::VP: return std::exp(-0.5 * beta0 * (1.0 - t));
    default: return m_fn(t);
  }
}

double PathSchedule::dm(double t) const {
  switch (kind) {
    case Kind::OT: return 1.0;
    case Kind::VP: return 0.5 * beta0 * std::exp(-0.5 * beta0 * (1.0 - t));
    default: return dm_fn(t);
  }
}

double PathSchedule::sigma(double t) const {
  double s;
  switch (kind) {
    case Kind::OT: s = 1.0 - t; break;
    case Kind::VP: {
      const double a = std::exp(-0.5 * beta0 * (1.0 - t));
      s = std::sqrt(1.0 - a * a);
      break;
    }
    default: s = sigma_fn(t);
  }
  if (t < 1.0)
    check(s > 0.0, "schedule sigma must be positive on [0,1), got " + fmt17(s) +
                       " at t=" + fmt17(t));
  return s;
}

double PathSchedule::dsigma(double t) const {
  switch (kind) {
    case Kind::OT: return -1.0;
    case Kind::VP: {
      // d/dt sigma^2 = -beta0 alpha^2, with alpha evaluated at 1-t.
      const double a = std::exp(-0.5 * beta0 * (1.0 - t));
      return -0.5 * beta0 * a * a / std::sqrt(1.0 - a * a);
    }
    default: return dsigma_fn(t);
  }
}

double PathSchedule::derivative_fd_error(double h) const {
  double worst = 0.0;
  for (double t = 0.05; t < 0.95; t += 0.09) {
    const double fd_m = (m(t + h) - m(t - h)) / (2.0 * h);
    const double fd_s = (sigma(t + h) - sigma(t - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd_m - dm(t)));
    worst = std::max(worst, std::abs(fd_s - dsigma(t)));
  }
  return worst;
}

std::string PathSchedule::kind_name() const {
  switch (kind) {
    case Kind::OT: return "ot";
    case Kind::VP: return "vp";
    default: return "custom";
  }
}

}  // namespace flowlab
