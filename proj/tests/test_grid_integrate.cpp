// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "flowlab/data.hpp"
#include "flowlab/grid.hpp"
#include "flowlab/integrate.hpp"
#include "flowlab/io.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/schedule.hpp"
#include "flowlab/velocity.hpp"

using namespace flowlab;
namespace fs = std::filesystem;

TEST_CASE("time grids start at zero and stop one epsilon short of one") {
  for (const std::string kind : {"uniform", "geometric"}) {
    TimeGrid g = make_grid(kind, 200, 1e-4);
    REQUIRE(g.nodes.size() == 201);
    CHECK(g.nodes(0) == 0.0);
    CHECK(g.nodes(200) == doctest::Approx(1.0 - 1e-4).epsilon(1e-14));
    CHECK(g.steps() == 200);
    for (Index k = 0; k + 1 <= 200; ++k) CHECK(g.nodes(k + 1) > g.nodes(k));
  }
  CHECK_THROWS_AS(make_grid("uniform", 0, 1e-4), config_error);
  CHECK_THROWS_AS(make_grid("uniform", 10, 0.0), config_error);
  CHECK_THROWS_AS(make_grid("uniform", 10, 1.0), config_error);
  CHECK_THROWS_AS(make_grid("chebyshev", 10, 1e-4), config_error);
}

TEST_CASE("geometric grid contracts the remaining time by a fixed ratio") {
  TimeGrid g = make_grid("geometric", 100, 1e-3);
  // 1 - t_k = r^k with r = epsilon^(1/steps).
  double r = std::pow(1e-3, 1.0 / 100.0);
  for (Index k = 0; k <= 100; ++k) {
    CHECK(1.0 - g.nodes(k) == doctest::Approx(std::pow(r, static_cast<double>(k)))
                                  .epsilon(1e-12));
  }
}

TEST_CASE("uniform grid has equal steps") {
  TimeGrid g = make_grid("uniform", 50, 1e-2);
  double h = (1.0 - 1e-2) / 50.0;
  for (Index k = 0; k < 50; ++k) {
    CHECK(g.nodes(k + 1) - g.nodes(k) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("euler is exact on a constant field") {
  FunctionField field(2, [](const Vec&, double) {
    Vec v(2);
    v << 1.0, -2.0;
    return v;
  });
  TimeGrid g = make_grid("uniform", 37, 1e-3);
  Vec x0(2);
  x0 << 0.5, 0.5;
  Trajectory traj = integrate_ode(field, x0, g, OdeMethod::Euler);
  REQUIRE(traj.states.cols() == 38);
  double T = g.nodes(37);
  CHECK(traj.states(0, 37) == doctest::Approx(0.5 + T).epsilon(1e-14));
  CHECK(traj.states(1, 37) == doctest::Approx(0.5 - 2.0 * T).epsilon(1e-14));
  CHECK(traj.times == g.nodes);
}

TEST_CASE("rk4 reproduces a linear flow to high order") {
  // dx/dt = a x has solution x(T) = x0 exp(aT); rk4 with 100 uniform steps is
  // accurate to O(h^4) ~ 1e-9 relative.
  const double a = -1.3;
  FunctionField field(1, [a](const Vec& x, double) { return Vec(a * x); });
  TimeGrid g = make_grid("uniform", 100, 1e-6);
  Vec x0(1);
  x0 << 2.0;
  Trajectory te = integrate_ode(field, x0, g, OdeMethod::Euler);
  Trajectory tr = integrate_ode(field, x0, g, OdeMethod::RK4);
  double truth = 2.0 * std::exp(a * g.nodes(100));
  double err_euler = std::abs(te.states(0, 100) - truth);
  double err_rk4 = std::abs(tr.states(0, 100) - truth);
  CHECK(err_rk4 < 1e-9);
  CHECK(err_euler > 100.0 * err_rk4);
}

TEST_CASE("single data point makes every trajectory a straight line") {
  Mat pts(3, 1);
  pts.col(0) << 2.0, -1.0, 0.5;
  DataMatrix data{pts};
  OptimalVelocityField field(PathSchedule::ot(), data);
  TimeGrid g = make_grid("geometric", 60, 1e-5);
  Mat X0 = sample_standard_gaussian(RngSpec{1, 201}, 3, 10);
  for (Index j = 0; j < 10; ++j) {
    Trajectory traj = integrate_ode(field, X0.col(j), g, OdeMethod::Euler);
    for (Index k = 0; k <= 60; ++k) {
      double t = g.nodes(k);
      Vec line = (1.0 - t) * X0.col(j) + t * pts.col(0);
      CHECK((traj.states.col(k) - line).norm() < 1e-10 * (1.0 + line.norm()));
    }
  }
}

TEST_CASE("batched endpoints equal per-column integration for any worker count") {
  DataMatrix data = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{1, 100});
  OptimalVelocityField field(PathSchedule::ot(), data);
  TimeGrid g = make_grid("geometric", 80, 1e-4);
  Mat X0 = sample_standard_gaussian(RngSpec{41, 0}, 2, 16);
  Mat E1 = ode_endpoints(field, X0, g, OdeMethod::RK4, 1);
  Mat E4 = ode_endpoints(field, X0, g, OdeMethod::RK4, 4);
  CHECK(E1 == E4);
  Mat Es = ode_endpoints_synced(field, X0, g, OdeMethod::RK4);
  for (Index j = 0; j < 16; ++j) {
    Trajectory traj = integrate_ode(field, X0.col(j), g, OdeMethod::RK4);
    CHECK((E1.col(j) - traj.states.col(80)).norm() == 0.0);
    CHECK((Es.col(j) - traj.states.col(80)).norm() < 1e-12);
  }
}

TEST_CASE("zero diffusion reduces the stochastic integrator to euler") {
  DataMatrix data = sparse_square_dataset(4, 10.0, 5.0, 2, RngSpec{42, 0});
  OptimalVelocityField field(PathSchedule::ot(), data);
  TimeGrid g = make_grid("uniform", 50, 1e-3);
  Vec x0(2);
  x0 << 0.1, -0.2;
  Trajectory sde = integrate_sde(field, x0, g, 0.0, RngSpec{42, 1});
  Trajectory ode = integrate_ode(field, x0, g, OdeMethod::Euler);
  CHECK(sde.states == ode.states);
}

TEST_CASE("stochastic paths are reproducible and share noise across sigma") {
  DataMatrix data = sparse_square_dataset(4, 10.0, 5.0, 2, RngSpec{43, 0});
  OptimalVelocityField field(PathSchedule::ot(), data);
  TimeGrid g = make_grid("uniform", 50, 1e-3);
  Vec x0 = Vec::Zero(2);
  Trajectory a = integrate_sde(field, x0, g, 0.05, RngSpec{43, 1});
  Trajectory b = integrate_sde(field, x0, g, 0.05, RngSpec{43, 1});
  CHECK(a.states == b.states);
  // Same spec, smaller sigma: the perturbation shrinks smoothly because the
  // Wiener increments are identical draws.
  Trajectory ode = integrate_ode(field, x0, g, OdeMethod::Euler);
  Trajectory c = integrate_sde(field, x0, g, 0.01, RngSpec{43, 1});
  double dev_a = (a.states.col(50) - ode.states.col(50)).norm();
  double dev_c = (c.states.col(50) - ode.states.col(50)).norm();
  CHECK(dev_c < dev_a);
  CHECK(dev_c > 0.0);
  // Batched endpoints match one-at-a-time runs and are worker-count invariant.
  Mat X0 = sample_standard_gaussian(RngSpec{43, 2}, 2, 8);
  Mat E1 = sde_endpoints(field, X0, g, 0.05, RngSpec{43, 3}, 1);
  Mat E3 = sde_endpoints(field, X0, g, 0.05, RngSpec{43, 3}, 3);
  CHECK(E1 == E3);
  for (Index j = 0; j < 8; ++j) {
    Trajectory tj = integrate_sde(field, X0.col(j), g, 0.05,
                                  substream(RngSpec{43, 3}, static_cast<std::uint64_t>(j)));
    CHECK((E1.col(j) - tj.states.col(50)).norm() == 0.0);
  }
}

TEST_CASE("generation snaps endpoints to the nearest data point") {
  Mat pts(1, 2);
  pts << -1.0, 1.0;
  DataMatrix data{pts};
  OptimalVelocityField field(PathSchedule::ot(), data);
  TimeGrid g = make_grid("geometric", 120, 1e-6);
  Vec x0(1);
  x0 << 0.37;
  GenerateResult res = generate(field, x0, g, data, OdeMethod::RK4);
  CHECK(res.nearest == 1);
  CHECK(res.distance < 1e-4);
  CHECK_FALSE(res.tie);
  // A start at the symmetry point cannot move and ends equidistant: tie.
  Vec mid = Vec::Zero(1);
  GenerateResult sym = generate(field, mid, g, data, OdeMethod::RK4, 1.5);
  CHECK(sym.tie);
}

TEST_CASE("trajectory csv is written with one row per node") {
  FunctionField field(2, [](const Vec&, double) { return Vec(Vec::Ones(2)); });
  TimeGrid g = make_grid("uniform", 5, 1e-2);
  Trajectory traj = integrate_ode(field, Vec::Zero(2), g, OdeMethod::Euler);
  fs::path p = fs::temp_directory_path() / "flowlab_traj_test.csv";
  save_trajectory(traj, p.string());
  std::string text = read_file(p.string());
  size_t rows = 0;
  for (char c : text) rows += (c == '\n');
  CHECK(rows == 7);  // header + 6 nodes
  CHECK(text.rfind("t,", 0) == 0);
  fs::remove(p);
}

TEST_CASE("flow jacobian of a single-point field contracts at rate 1 - t") {
  // The exact flow map for one data point is phi_t(x) = (1-t) x + t y, whose
  // Jacobian is (1-t) I independent of x and y.
  Mat pts(2, 1);
  pts.col(0) << 1.0, 2.0;
  DataMatrix data{pts};
  OptimalVelocityField field(PathSchedule::ot(), data);
  Vec x(2);
  x << -0.4, 0.9;
  Mat J = flow_jacobian_fd(field, x, 0.0, 0.7, 0.0, 200);
  CHECK((J - 0.3 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lipschitz estimate recovers the single-point rate 1/(1-t)") {
  Mat pts(2, 1);
  pts.col(0) << 0.0, 0.0;
  DataMatrix data{pts};
  OptimalVelocityField field(PathSchedule::ot(), data);
  Mat samples = sample_standard_gaussian(RngSpec{44, 0}, 2, 12);
  Vec tg(3);
  tg << 0.0, 0.5, 0.8;
  // Space Jacobian of (y - x)/(1-t) is -I/(1-t): spectral norm 5 at t = 0.8.
  double L = lipschitz_estimate(field, samples, tg);
  CHECK(L == doctest::Approx(5.0).epsilon(1e-3));
}
