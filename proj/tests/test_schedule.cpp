// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "flowlab/common.hpp"
#include "flowlab/data.hpp"
#include "flowlab/quadratic.hpp"
#include "flowlab/schedule.hpp"
#include "flowlab/velocity.hpp"

using namespace flowlab;

TEST_CASE("straight-line schedule endpoints and slopes") {
  PathSchedule s = PathSchedule::ot();
  CHECK(s.m(0.0) == 0.0);
  CHECK(s.m(0.999999) == doctest::Approx(0.999999));
  CHECK(s.sigma(0.0) == doctest::Approx(1.0));
  CHECK(s.dm(0.3) == doctest::Approx(1.0));
  CHECK(s.dsigma(0.3) == doctest::Approx(-1.0));
  CHECK(s.derivative_fd_error() < 1e-6);
  CHECK(s.kind_name() == "ot");
}

TEST_CASE("variance-preserving schedule matches its closed form") {
  const double beta0 = 1.7;
  PathSchedule s = PathSchedule::vp(beta0);
  for (double t : {0.0, 0.25, 0.5, 0.9}) {
    double alpha = std::exp(-beta0 * (1.0 - t) / 2.0);
    CHECK(s.m(t) == doctest::Approx(alpha).epsilon(1e-14));
    CHECK(s.sigma(t) == doctest::Approx(std::sqrt(1.0 - alpha * alpha)).epsilon(1e-14));
    // Preserves total variance of a unit-norm endpoint: m^2 + sigma^2 = 1.
    CHECK(s.m(t) * s.m(t) + s.sigma(t) * s.sigma(t) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(s.derivative_fd_error() < 1e-6);
  CHECK(s.kind_name() == "vp");
  CHECK_THROWS_AS(PathSchedule::vp(0.0), config_error);
}

TEST_CASE("custom schedules are vetted by the derivative check") {
  PathSchedule good = PathSchedule::custom(
      [](double t) { return t * t; }, [](double t) { return 2.0 * t; },
      [](double t) { return 1.0 - t * t; }, [](double t) { return -2.0 * t; });
  CHECK(good.derivative_fd_error() < 1e-6);
  PathSchedule bad = PathSchedule::custom(
      [](double t) { return t * t; }, [](double) { return 0.0; },  // wrong slope
      [](double t) { return 1.0 - t * t; }, [](double t) { return -2.0 * t; });
  CHECK(bad.derivative_fd_error() > 1e-2);
}

TEST_CASE("time arguments outside the unit interval are rejected") {
  PathSchedule s = PathSchedule::ot();
  Mat pts(1, 1);
  pts(0, 0) = 1.0;
  DataMatrix data{pts};
  Vec x = Vec::Zero(1);
  CHECK_THROWS_AS(optimal_velocity(s, x, data, 1.0), config_error);
  CHECK_THROWS_AS(optimal_velocity(s, x, data, -0.1), config_error);
  CHECK_NOTHROW(optimal_velocity(s, x, data, 0.0));
}

TEST_CASE("two-point mixture density at the midpoint") {
  // Data {-1, +1} in one dimension at t = 1/2: means are -1/2 and 1/2 and the
  // spread is 1/2, so the density at the origin is the average of two normal
  // densities phi(0; +-1/2, 1/4).  Reference value computed independently
  // with 30-digit arithmetic.
  Mat pts(1, 2);
  pts << -1.0, 1.0;
  DataMatrix data{pts};
  PathSchedule s = PathSchedule::ot();
  Vec x = Vec::Zero(1);
  double rho = marginal_density(s, x, data, 0.5);
  CHECK(rho == doctest::Approx(0.48394144903828673).epsilon(1e-12));
  CHECK(marginal_logdensity(s, x, data, 0.5) == doctest::Approx(std::log(rho)));
}

TEST_CASE("mixture density integrates to one") {
  Mat pts(1, 3);
  pts << -2.0, 0.5, 3.0;
  DataMatrix data{pts};
  PathSchedule s = PathSchedule::ot();
  for (double t : {0.0, 0.5, 0.9}) {
    double mass = integrate_gl8(
        [&](double u) {
          Vec x(1);
          x(0) = u;
          return marginal_density(s, x, data, t);
        },
        -12.0, 12.0, 512);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("mixture moments match the closed form") {
  DataMatrix data = sparse_square_dataset(5, 8.0, 3.0, 3, RngSpec{21, 0});
  PathSchedule s = PathSchedule::vp(1.0);
  double t = 0.4;
  auto [mean, cov] = marginal_moments(s, data, t);
  Vec ybar = data.points.rowwise().mean();
  CHECK((mean - s.m(t) * ybar).norm() < 1e-12);
  Mat centered = data.points.colwise() - ybar;
  Mat SY = centered * centered.transpose() / static_cast<double>(data.count());
  Mat expected = s.sigma(t) * s.sigma(t) * Mat::Identity(3, 3) + s.m(t) * s.m(t) * SY;
  CHECK((cov - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("marginal samples follow the mixture moments") {
  Mat pts(2, 2);
  pts << -1.0, 1.0, 0.0, 0.0;
  DataMatrix data{pts};
  PathSchedule s = PathSchedule::ot();
  double t = 0.5;
  Mat X = sample_marginal(s, data, t, RngSpec{22, 0}, 40000);
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 40000);
  auto [mean, cov] = marginal_moments(s, data, t);
  Vec emp_mean = X.rowwise().mean();
  CHECK((emp_mean - mean).norm() < 0.02);
  Mat centered = X.colwise() - emp_mean;
  Mat emp_cov = centered * centered.transpose() / static_cast<double>(X.cols());
  CHECK((emp_cov - cov).cwiseAbs().maxCoeff() < 0.02);
  // Counter-based sampling: same spec, same matrix.
  Mat Y = sample_marginal(s, data, t, RngSpec{22, 0}, 40000);
  CHECK(Y == X);
}
