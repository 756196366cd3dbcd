// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "flowlab/common.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/subspace_net.hpp"

using namespace flowlab;

namespace {
NetConfig small_cfg() {
  NetConfig cfg;
  cfg.sub_dim = 3;
  cfg.emb.s = 5.0;
  cfg.emb.ell = 100.0;
  cfg.emb.dim = 4;
  cfg.hidden = 8;
  cfg.blocks = 2;
  return cfg;
}

Mat random_inputs(const NetConfig& cfg, Index n, const RngSpec& spec) {
  Mat U = sample_standard_gaussian(spec, cfg.in_dim(), n);
  return U;
}
}  // namespace

TEST_CASE("softplus is stable and differentiates to the logistic") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus(800.0) == 800.0);           // no overflow
  CHECK(softplus(-800.0) == 0.0);            // no underflow surprises
  CHECK(softplus(-20.0) == doctest::Approx(std::exp(-20.0)).epsilon(1e-8));
  for (double z : {-3.0, -0.5, 0.0, 0.5, 3.0}) {
    double h = 1e-6;
    double fd = (softplus(z + h) - softplus(z - h)) / (2.0 * h);
    CHECK(softplus_prime(z) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("network construction, shapes and parameter count") {
  NetConfig cfg = small_cfg();
  SubspaceNet net = make_net(cfg, RngSpec{71, 0});
  CHECK(net.W_in.rows() == 8);
  CHECK(net.W_in.cols() == 7);  // 3 + 4
  CHECK(net.W_out.rows() == 3);
  REQUIRE(net.W1.size() == 2);
  REQUIRE(net.W2.size() == 2);
  Index expected = 8 * 7 + 8          // stem
                   + 2 * (8 * 8 + 8)  // block pre-activations
                   + 2 * (8 * 8 + 8)  // block post-activations
                   + 3 * 8 + 3;       // head
  CHECK(param_count(net) == expected);
  // Biases start at zero, weights spread with the fan-in scale.
  CHECK(net.b_in.cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.b_out.cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.W_in.cwiseAbs().maxCoeff() > 0.0);
  // Deterministic in the stream.
  SubspaceNet net2 = make_net(cfg, RngSpec{71, 0});
  CHECK(flatten(net2) == flatten(net));
  SubspaceNet net3 = make_net(cfg, RngSpec{71, 1});
  CHECK(flatten(net3) != flatten(net));
}

TEST_CASE("flatten and unflatten are exact inverses") {
  NetConfig cfg = small_cfg();
  SubspaceNet net = make_net(cfg, RngSpec{72, 0});
  Vec theta = flatten(net);
  REQUIRE(theta.size() == param_count(net));
  SubspaceNet other = make_net(cfg, RngSpec{72, 1});
  unflatten(theta, other);
  CHECK(flatten(other) == theta);
  Mat U = random_inputs(cfg, 5, RngSpec{72, 2});
  CHECK(net_forward(other, U) == net_forward(net, U));
  Vec bad = Vec::Zero(theta.size() + 1);
  CHECK_THROWS_AS(unflatten(bad, other), config_error);
}

TEST_CASE("single-sample wrapper matches the batch forward") {
  NetConfig cfg = small_cfg();
  SubspaceNet net = make_net(cfg, RngSpec{73, 0});
  CounterRng rng(RngSpec{73, 1});
  for (int k = 0; k < 10; ++k) {
    Vec x_sub(3);
    for (Index i = 0; i < 3; ++i) x_sub(i) = rng.normal();
    double t = rng.uniform(0.0, 0.999);
    Vec direct = net_apply(net, x_sub, t);
    Mat U(cfg.in_dim(), 1);
    U.topRows(3) = x_sub;
    U.bottomRows(4) = emb(t, cfg.emb);
    Mat batch = net_forward(net, U);
    CHECK((direct - batch.col(0)).norm() == 0.0);
  }
}

TEST_CASE("cached forward agrees with the plain forward") {
  NetConfig cfg = small_cfg();
  SubspaceNet net = make_net(cfg, RngSpec{74, 0});
  Mat U = random_inputs(cfg, 6, RngSpec{74, 1});
  NetCache cache;
  Mat cached = net_forward_cached(net, U, cache);
  CHECK(cached == net_forward(net, U));
  REQUIRE(cache.h.size() == 3);  // stem output + two block outputs
  CHECK(cache.U == U);
}

TEST_CASE("backward pass matches central finite differences") {
  NetConfig cfg = small_cfg();
  SubspaceNet net = make_net(cfg, RngSpec{75, 0});
  Mat U = random_inputs(cfg, 4, RngSpec{75, 1});
  Mat upstream = sample_standard_gaussian(RngSpec{75, 2}, 3, 4);

  NetCache cache;
  net_forward_cached(net, U, cache);
  Mat input_grads;
  Vec g = net_backward(net, cache, upstream, &input_grads);

  auto objective = [&](const SubspaceNet& n) {
    return (net_forward(n, U).array() * upstream.array()).sum();
  };

  Vec theta = flatten(net);
  CounterRng pick(RngSpec{75, 3});
  const double h = 1e-6;
  SubspaceNet probe = net;
  for (int k = 0; k < 40; ++k) {
    Index i = static_cast<Index>(pick.uniform_index(static_cast<std::uint64_t>(theta.size())));
    Vec tp = theta;
    tp(i) = theta(i) + h;
    unflatten(tp, probe);
    double up = objective(probe);
    tp(i) = theta(i) - h;
    unflatten(tp, probe);
    double dn = objective(probe);
    double fd = (up - dn) / (2.0 * h);
    CHECK(g(i) == doctest::Approx(fd).epsilon(5e-5));
  }

  // Input gradients by the same probe.
  for (int k = 0; k < 10; ++k) {
    Index r = static_cast<Index>(pick.uniform_index(static_cast<std::uint64_t>(U.rows())));
    Index c = static_cast<Index>(pick.uniform_index(static_cast<std::uint64_t>(U.cols())));
    Mat Up = U;
    Up(r, c) += h;
    double up = (net_forward(net, Up).array() * upstream.array()).sum();
    Up(r, c) = U(r, c) - h;
    double dn = (net_forward(net, Up).array() * upstream.array()).sum();
    double fd = (up - dn) / (2.0 * h);
    CHECK(input_grads(r, c) == doctest::Approx(fd).epsilon(5e-5));
  }
}

TEST_CASE("network weights survive a json round trip bit for bit") {
  NetConfig cfg = small_cfg();
  SubspaceNet net = make_net(cfg, RngSpec{76, 0});
  std::string text = net_to_json(net);
  SubspaceNet back = net_from_json(text);
  CHECK(back.cfg.sub_dim == cfg.sub_dim);
  CHECK(back.cfg.hidden == cfg.hidden);
  CHECK(back.cfg.emb.dim == cfg.emb.dim);
  CHECK(flatten(back) == flatten(net));
  CHECK_THROWS_AS(net_from_json("{\"not\": \"a net\"}"), config_error);
}

TEST_CASE("config validation rejects bad shapes") {
  NetConfig cfg = small_cfg();
  cfg.sub_dim = 0;
  CHECK_THROWS_AS(make_net(cfg, RngSpec{77, 0}), config_error);
  cfg = small_cfg();
  cfg.hidden = 0;
  CHECK_THROWS_AS(make_net(cfg, RngSpec{77, 0}), config_error);
  cfg = small_cfg();
  cfg.emb.dim = 5;
  CHECK_THROWS_AS(make_net(cfg, RngSpec{77, 0}), config_error);
}
