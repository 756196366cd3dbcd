// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "flowlab/common.hpp"
#include "flowlab/diagonal_field.hpp"
#include "flowlab/embedding.hpp"
#include "flowlab/quadratic.hpp"

using namespace flowlab;

namespace {
EmbeddingConfig tiny_cfg() {
  EmbeddingConfig cfg;
  cfg.s = 1.0;
  cfg.ell = 1e4;
  cfg.dim = 2;
  return cfg;
}
}  // namespace

TEST_CASE("embedding layout: interleaved sines and cosines") {
  EmbeddingConfig cfg;
  cfg.s = 100.0;
  cfg.ell = 1e4;
  cfg.dim = 8;
  Vec w = emb_frequencies(cfg);
  REQUIRE(w.size() == 4);
  for (Index k = 0; k < 4; ++k) {
    CHECK(w(k) == doctest::Approx(100.0 / std::pow(1e4, 2.0 * k / 8.0)).epsilon(1e-14));
  }
  double t = 0.37;
  Vec v = emb(t, cfg);
  REQUIRE(v.size() == 8);
  for (Index k = 0; k < 4; ++k) {
    CHECK(v(2 * k) == doctest::Approx(std::sin(w(k) * t)).epsilon(1e-15));
    CHECK(v(2 * k + 1) == doctest::Approx(std::cos(w(k) * t)).epsilon(1e-15));
  }
  // At t = 0 the sines vanish and the cosines are exactly one.
  Vec v0 = emb(0.0, cfg);
  for (Index k = 0; k < 4; ++k) {
    CHECK(v0(2 * k) == 0.0);
    CHECK(v0(2 * k + 1) == 1.0);
  }
}

TEST_CASE("embedding variants agree") {
  EmbeddingConfig cfg;
  cfg.dim = 16;
  Vec direct = emb(0.61, cfg);
  Vec buf(16);
  emb_into(0.61, cfg, buf.data());
  CHECK(buf == direct);
  Vec ts(3);
  ts << 0.1, 0.61, 0.9;
  Mat B = emb_batch(ts, cfg);
  REQUIRE(B.rows() == 16);
  REQUIRE(B.cols() == 3);
  CHECK(B.col(1) == direct);
}

TEST_CASE("embedding config validation") {
  EmbeddingConfig odd;
  odd.dim = 7;
  CHECK_THROWS_AS(validate(odd), config_error);
  EmbeddingConfig bad_s;
  bad_s.s = 0.0;
  CHECK_THROWS_AS(validate(bad_s), config_error);
  EmbeddingConfig bad_ell;
  bad_ell.ell = 1.0;
  CHECK_THROWS_AS(validate(bad_ell), config_error);
}

TEST_CASE("quadrature is exact on polynomials and accurate on oscillations") {
  // 8-node Gauss-Legendre integrates degree <= 15 exactly.
  auto poly = [](double t) { return 5.0 * std::pow(t, 9) - 3.0 * t * t + 1.0; };
  // int_0^1 = 0.5 - 1 + 1 = 0.5.
  CHECK(integrate_gl8(poly, 0.0, 1.0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(integrate_gl8([](double t) { return std::sin(40.0 * t); }, 0.0, 1.0, 64) ==
        doctest::Approx((1.0 - std::cos(40.0)) / 40.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate_gl8(poly, 0.0, 1.0, 0), config_error);
}

TEST_CASE("two-coefficient quadratic data matches closed forms") {
  // dim 2, s = 1: the embedding is (sin t, cos t) and every moment has an
  // elementary antiderivative.  Reference values computed independently with
  // 30-digit arithmetic:
  //   e = (1 - cos 1, sin 1), b = (1 - sin 1, 1 - cos 1).
  QuadraticData q = compute_quadratic_data(tiny_cfg());
  REQUIRE(q.e.size() == 2);
  CHECK(q.e(0) == doctest::Approx(0.45969769413186028).epsilon(1e-13));
  CHECK(q.e(1) == doctest::Approx(0.84147098480789651).epsilon(1e-13));
  CHECK(q.b(0) == doctest::Approx(0.15852901519210349).epsilon(1e-13));
  CHECK(q.b(1) == doctest::Approx(0.45969769413186028).epsilon(1e-13));
  CHECK(q.A(0, 0) == doctest::Approx(0.030328845019876879).epsilon(1e-12));
  CHECK(q.A(0, 1) == doctest::Approx(0.072981645431607202).epsilon(1e-12));
  CHECK(q.A(1, 0) == doctest::Approx(0.072981645431607202).epsilon(1e-12));
  CHECK(q.A(1, 1) == doctest::Approx(0.30300448831345645).epsilon(1e-12));
  CHECK(q.min_eig == doctest::Approx(0.012024104022041903).epsilon(1e-10));
  CHECK(q.max_eig == doctest::Approx(0.32130922931129143).epsilon(1e-10));
  CHECK(q.doubling_gap < 1e-9);

  Vec k = kappa_limit(q);
  CHECK(k(0) == doctest::Approx(-3.7493659886901106).epsilon(1e-10));
  CHECK(k(1) == doctest::Approx(-0.61405953419234612).epsilon(1e-10));
  CHECK((q.A * k + q.b).norm() < 1e-12);
  CHECK(offsubspace_limit_factor(q) == doctest::Approx(0.10642782954239562).epsilon(1e-10));
  CHECK(offsubspace_factor(k, q) ==
        doctest::Approx(offsubspace_limit_factor(q)).epsilon(1e-12));

  // Objective value at the limit, again against an independent reference.
  double loss = integrate_gl8(
      [&](double t) {
        double o = k(0) * std::sin(t) + k(1) * std::cos(t);
        double r = (1.0 - t) * o + 1.0;
        return r * r;
      },
      0.0, 1.0, 512);
  CHECK(loss == doctest::Approx(0.1233349502902836).epsilon(1e-10));
}

TEST_CASE("gradient flow follows the quadratic dynamics") {
  QuadraticData q = compute_quadratic_data(tiny_cfg());
  Vec k0(2);
  k0 << 1.5, -0.5;
  // tau = 0 returns the start.
  CHECK((kappa_flow(0.0, k0, q) - k0).norm() < 1e-14);
  // Long times land on the unconstrained minimizer.
  CHECK((kappa_flow(1000.0, k0, q) - kappa_limit(q)).norm() < 1e-8);
  // d kappa / d tau = -2 (A kappa + b), checked by central differences.
  for (double tau : {0.5, 3.0}) {
    double h = 1e-5;
    Vec fd = (kappa_flow(tau + h, k0, q) - kappa_flow(tau - h, k0, q)) / (2.0 * h);
    Vec rhs = -2.0 * (q.A * kappa_flow(tau, k0, q) + q.b);
    CHECK((fd - rhs).norm() < 1e-7);
  }
  // Cross-check against naive explicit-Euler gradient descent.
  Vec k = k0;
  const double step = 1e-3;
  for (int it = 0; it < 100000; ++it) k -= step * 2.0 * (q.A * k + q.b);
  CHECK((k - kappa_flow(100.0, k0, q)).norm() < 5e-5);
}

TEST_CASE("truncated limit keeps only identifiable directions") {
  QuadraticData q2 = compute_quadratic_data(tiny_cfg());
  TruncatedLimit t2 = kappa_limit_truncated(q2, 1e-6);
  // Well-conditioned: nothing is cut and the result matches the full limit.
  CHECK(t2.rank == 2);
  CHECK((t2.kappa - kappa_limit(q2)).norm() < 1e-10);
  CHECK(t2.condition == doctest::Approx(q2.max_eig / q2.min_eig).epsilon(1e-8));

  EmbeddingConfig big;
  big.s = 1000.0;
  big.ell = 1e4;
  big.dim = 64;
  QuadraticData qb = compute_quadratic_data(big, 4096);
  TruncatedLimit tb = kappa_limit_truncated(qb, 1e-4);
  CHECK(tb.rank > 0);
  CHECK(tb.rank < 64);
  CHECK(tb.cutoff == doctest::Approx(1e-4 * qb.max_eig));
  // The truncated solution must not blow up and must reduce the objective
  // far below doing nothing: with zero coefficients the weighted residual
  // (1-t) 0 + 1 is identically one, so the normalized error is exactly 1.
  double err_trunc = weighted_target_error(tb.kappa, big, 0.9);
  double err_zero = weighted_target_error(Vec::Zero(64), big, 0.9);
  CHECK(err_zero == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(err_trunc < 0.1 * err_zero);
  // Ill-conditioned direct solve is refused.
  CHECK_THROWS_AS(kappa_limit(qb), invariant_error);
}

TEST_CASE("diagonal exponentials agree across equivalent routes") {
  QuadraticData q = compute_quadratic_data(tiny_cfg());
  DiagonalField field;
  field.cfg = q.cfg;
  field.kappa = kappa_limit(q);
  field.validate_shapes();
  CHECK(field.shared());
  double by_quadrature = diagonal_exponential(field);
  CHECK(by_quadrature == doctest::Approx(offsubspace_limit_factor(q)).epsilon(1e-10));
  Vec factors = diagonal_exponential_factors(field, 5);
  REQUIRE(factors.size() == 5);
  for (Index i = 0; i < 5; ++i)
    CHECK(factors(i) == doctest::Approx(by_quadrature).epsilon(1e-12));

  // Per-entry mode: one row per diagonal entry, each its own factor.
  DiagonalField per;
  per.cfg = q.cfg;
  per.per_entry.resize(2, 2);
  per.per_entry.row(0) = kappa_limit(q).transpose();
  per.per_entry.row(1) = Vec::Zero(2).transpose();
  per.validate_shapes();
  CHECK_FALSE(per.shared());
  Vec pf = diagonal_exponential_factors(per, 2);
  CHECK(pf(0) == doctest::Approx(offsubspace_limit_factor(q)).epsilon(1e-10));
  CHECK(pf(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(per.values(0.3, 2)(1) == 0.0);
}
