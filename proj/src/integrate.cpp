// SPDX-License-Identifier: Apache-2.0
#include "flowlab/integrate.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>

#include "flowlab/parallel.hpp"

namespace flowlab {

OdeMethod parse_method(const std::string& name) {
  if (name == "euler") return OdeMethod::Euler;
  if (name == "rk4") return OdeMethod::RK4;
  throw config_error("unknown ODE method '" + name + "' (expected euler|rk4)");
}

namespace {

void check_finite(const Vec& x, Index node) {
  if (!x.allFinite())
    throw invariant_error("integration produced a non-finite state at node " +
                          std::to_string(node));
}

// One step of the chosen scheme; scratch vectors are caller-owned so batch
// drivers can reuse them across steps.
void ode_step(const VelocityField& field, Vec& x, double t, double h, OdeMethod method,
              Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
  if (method == OdeMethod::Euler) {
    k1 = field.at(x, t);
    x += h * k1;
    return;
  }
  k1 = field.at(x, t);
  tmp = x + (0.5 * h) * k1;
  k2 = field.at(tmp, t + 0.5 * h);
  tmp = x + (0.5 * h) * k2;
  k3 = field.at(tmp, t + 0.5 * h);
  tmp = x + h * k3;
  k4 = field.at(tmp, t + h);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory integrate_ode(const VelocityField& field, const Vec& x0, const TimeGrid& grid,
                         OdeMethod method) {
  require(x0.size() == field.dim(), "integrate_ode: x0 dimension does not match the field");
  const Index n = grid.steps();
  Trajectory traj;
  traj.times = grid.nodes;
  traj.states.resize(x0.size(), n + 1);
  Vec x = x0, k1, k2, k3, k4, tmp;
  traj.states.col(0) = x;
  check_finite(x, 0);
  for (Index k = 0; k < n; ++k) {
    const double t = grid.nodes(k);
    const double h = grid.nodes(k + 1) - t;
    ode_step(field, x, t, h, method, k1, k2, k3, k4, tmp);
    check_finite(x, k + 1);
    traj.states.col(k + 1) = x;
  }
  return traj;
}

Mat ode_endpoints(const VelocityField& field, const Mat& X0, const TimeGrid& grid,
                  OdeMethod method, int threads) {
  require(X0.rows() == field.dim(), "ode_endpoints: state dimension does not match the field");
  Mat out(X0.rows(), X0.cols());
  parallel_for(X0.cols(), threads, [&](std::int64_t j) {
    Vec x = X0.col(j), k1, k2, k3, k4, tmp;
    for (Index k = 0; k < grid.steps(); ++k) {
      const double t = grid.nodes(k);
      const double h = grid.nodes(k + 1) - t;
      ode_step(field, x, t, h, method, k1, k2, k3, k4, tmp);
    }
    check_finite(x, grid.steps());
    out.col(j) = x;
  });
  return out;
}

Mat ode_endpoints_synced(const VelocityField& field, const Mat& X0, const TimeGrid& grid,
                         OdeMethod method) {
  require(X0.rows() == field.dim(),
          "ode_endpoints_synced: state dimension does not match the field");
  Mat X = X0, K1, K2, K3, K4, tmp;
  for (Index k = 0; k < grid.steps(); ++k) {
    const double t = grid.nodes(k);
    const double h = grid.nodes(k + 1) - t;
    if (method == OdeMethod::Euler) {
      field.at_batch(X, t, K1);
      X += h * K1;
    } else {
      field.at_batch(X, t, K1);
      tmp = X + (0.5 * h) * K1;
      field.at_batch(tmp, t + 0.5 * h, K2);
      tmp = X + (0.5 * h) * K2;
      field.at_batch(tmp, t + 0.5 * h, K3);
      tmp = X + h * K3;
      field.at_batch(tmp, t + h, K4);
      X += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    }
    if (!X.allFinite())
      throw invariant_error("integration produced a non-finite state at node " +
                            std::to_string(k + 1));
  }
  return X;
}

Trajectory integrate_sde(const VelocityField& drift, const Vec& x0, const TimeGrid& grid,
                         double sigma_noise, const RngSpec& spec) {
  require(x0.size() == drift.dim(), "integrate_sde: x0 dimension does not match the field");
  require(sigma_noise >= 0.0, "integrate_sde: sigma must be non-negative");
  const Index n = grid.steps();
  const Index d = x0.size();
  Trajectory traj;
  traj.times = grid.nodes;
  traj.states.resize(d, n + 1);
  Vec x = x0;
  traj.states.col(0) = x;
  CounterRng rng(spec);
  for (Index k = 0; k < n; ++k) {
    const double t = grid.nodes(k);
    const double h = grid.nodes(k + 1) - t;
    x += h * drift.at(x, t);
    if (sigma_noise > 0.0) {
      // Drawn even when the drift aborts later so the stream stays aligned
      // with the step index; skipped entirely at sigma = 0 to keep that case
      // bit-identical to the Euler ODE path.
      const double scale = sigma_noise * std::sqrt(h);
      for (Index i = 0; i < d; ++i) x(i) += scale * rng.normal();
    }
    check_finite(x, k + 1);
    traj.states.col(k + 1) = x;
  }
  return traj;
}

Mat sde_endpoints(const VelocityField& drift, const Mat& X0, const TimeGrid& grid,
                  double sigma_noise, const RngSpec& spec, int threads) {
  require(X0.rows() == drift.dim(), "sde_endpoints: state dimension does not match the field");
  Mat out(X0.rows(), X0.cols());
  parallel_for(X0.cols(), threads, [&](std::int64_t j) {
    const Trajectory traj =
        integrate_sde(drift, X0.col(j), grid, sigma_noise, substream(spec, j));
    out.col(j) = traj.states.col(grid.steps());
  });
  return out;
}

GenerateResult generate(const VelocityField& field, const Vec& x0, const TimeGrid& grid,
                        const DataMatrix& data, OdeMethod method, double snap_tol) {
  require(data.dim() == field.dim(), "generate: data dimension does not match the field");
  GenerateResult res;
  res.traj = integrate_ode(field, x0, grid, method);
  const Vec endpoint = res.traj.states.col(grid.steps());
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  for (Index i = 0; i < data.count(); ++i) {
    const double dist = (endpoint - data.points.col(i)).norm();
    if (dist < best) {
      second = best;
      best = dist;
      res.nearest = i;
    } else if (dist < second) {
      second = dist;
    }
  }
  res.distance = best;
  res.endpoint = data.points.col(res.nearest);
  res.tie = data.count() > 1 && (second - best) < snap_tol * 0.5 * (second + best);
  return res;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open file for writing: " + path);
  const Index d = traj.states.rows();
  out << "t";
  for (Index i = 0; i < d; ++i) out << ",x" << i;
  out << '\n';
  for (Index k = 0; k < traj.times.size(); ++k) {
    out << fmt17(traj.times(k));
    for (Index i = 0; i < d; ++i) out << ',' << fmt17(traj.states(i, k));
    out << '\n';
  }
  require(out.good(), "write failed: " + path);
}

namespace {

double default_step(const Vec& x, double h) {
  return h > 0.0 ? h : 1e-4 * (1.0 + x.norm());
}

}  // namespace

Mat field_jacobian_fd(const VelocityField& field, const Vec& x, double t, double h) {
  const Index d = x.size();
  const double step = default_step(x, h);
  Mat J(d, d);
  Vec probe = x;
  for (Index j = 0; j < d; ++j) {
    probe(j) = x(j) + step;
    const Vec fp = field.at(probe, t);
    probe(j) = x(j) - step;
    const Vec fm = field.at(probe, t);
    probe(j) = x(j);
    J.col(j) = (fp - fm) / (2.0 * step);
  }
  return J;
}

Mat flow_jacobian_fd(const VelocityField& field, const Vec& x, double s, double t, double h,
                     Index steps) {
  require(t >= s, "flow_jacobian_fd: needs t >= s");
  require(steps >= 1, "flow_jacobian_fd: steps must be >= 1");
  const Index d = x.size();
  const double step = default_step(x, h);
  const auto flow = [&](const Vec& x0) {
    Vec xx = x0, k1, k2, k3, k4, tmp;
    for (Index k = 0; k < steps; ++k) {
      const double tk = s + (t - s) * static_cast<double>(k) / static_cast<double>(steps);
      const double hk = (t - s) / static_cast<double>(steps);
      ode_step(field, xx, tk, hk, OdeMethod::RK4, k1, k2, k3, k4, tmp);
    }
    check_finite(xx, steps);
    return xx;
  };
  Mat J(d, d);
  Vec probe = x;
  for (Index j = 0; j < d; ++j) {
    probe(j) = x(j) + step;
    const Vec fp = flow(probe);
    probe(j) = x(j) - step;
    const Vec fm = flow(probe);
    probe(j) = x(j);
    J.col(j) = (fp - fm) / (2.0 * step);
  }
  return J;
}

double lipschitz_estimate(const VelocityField& field, const Mat& samples, const Vec& t_grid,
                          double h) {
  require(samples.cols() > 0 && t_grid.size() > 0,
          "lipschitz_estimate: needs at least one sample and one time");
  double worst = 0.0;
  for (Index j = 0; j < samples.cols(); ++j) {
    for (Index k = 0; k < t_grid.size(); ++k) {
      const Mat J = field_jacobian_fd(field, samples.col(j), t_grid(k), h);
      Eigen::JacobiSVD<Mat> svd(J);
      worst = std::max(worst, svd.singularValues()(0));
    }
  }
  return worst;
}

}  // namespace flowlab
