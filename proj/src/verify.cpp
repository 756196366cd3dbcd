// SPDX-License-Identifier: Apache-2.0
#include "flowlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "flowlab/convex.hpp"
#include "flowlab/data.hpp"
#include "flowlab/grid.hpp"
#include "flowlab/hierarchy.hpp"
#include "flowlab/integrate.hpp"
#include "flowlab/io.hpp"
#include "flowlab/losses.hpp"
#include "flowlab/optim.hpp"
#include "flowlab/osdnet.hpp"
#include "flowlab/quadratic.hpp"
#include "flowlab/train.hpp"
#include "flowlab/velocity.hpp"

namespace flowlab {

namespace {

CheckResult make_result(const std::string& module, const std::string& name, double measured,
                        double required, const std::string& detail) {
  CheckResult r;
  r.module = module;
  r.name = name;
  r.measured = measured;
  r.required = required;
  r.pass = measured <= required;  // NaN compares false and so fails
  r.detail = detail;
  return r;
}

ConvexRegion segment1d(double a, double b) {
  ConvexRegion r;
  r.generators.resize(1, 2);
  r.generators << a, b;
  return r;
}

ConvexRegion square2d(double x0, double y0, double side) {
  ConvexRegion r;
  r.generators.resize(2, 4);
  r.generators << x0, x0 + side, x0 + side, x0,  //
      y0, y0, y0 + side, y0 + side;
  return r;
}

void check_schedules(std::vector<CheckResult>& out) {
  out.push_back(make_result("paths", "straight-derivative-consistency",
                            PathSchedule::ot().derivative_fd_error(), 1e-6,
                            "analytic m', sigma' against central differences"));
  out.push_back(make_result("paths", "vp-derivative-consistency",
                            PathSchedule::vp(1.0).derivative_fd_error(), 1e-6,
                            "analytic m', sigma' against central differences"));

  DataMatrix pm1;
  pm1.points.resize(1, 2);
  pm1.points << -1.0, 1.0;
  const double dens = marginal_density(PathSchedule::ot(), Vec::Zero(1), pm1, 0.5);
  out.push_back(make_result("paths", "mixture-density-oracle",
                            std::abs(dens - 0.48394144903828673), 1e-9,
                            "two-point mixture density at the midpoint"));
}

void check_dynamics(std::vector<CheckResult>& out, const VerifyOptions& opts,
                    const DataMatrix& data6) {
  {
    DataMatrix one;
    one.points.resize(2, 1);
    one.points << 2.0, -1.0;
    const OptimalVelocityField field(PathSchedule::ot(), one);
    CounterRng rng(RngSpec{opts.seed, 201});
    Vec x0(2);
    x0 << rng.normal(), rng.normal();
    const TimeGrid grid = make_grid("uniform", 100, 1e-3);
    const Trajectory traj = integrate_ode(field, x0, grid, OdeMethod::Euler);
    double err = 0.0;
    for (Index k = 0; k < traj.times.size(); ++k) {
      const double t = traj.times(k);
      err = std::max(err,
                     (traj.states.col(k) - ((1.0 - t) * x0 + t * one.points.col(0))).norm());
    }
    out.push_back(make_result("dynamics", "single-point-exactness", err, 1e-10,
                              "one data point: the flow is the straight line to it"));
  }
  {
    const PathSchedule sched = PathSchedule::ot();
    CounterRng rng(RngSpec{opts.seed, 202});
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vec x(2);
      x << rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0);
      const double t = rng.uniform(0.01, 0.99);
      const Vec w = softmax_weights(sched, x, data6, t);
      worst = std::max(worst, std::abs(w.sum() - 1.0));
      worst = std::max(worst, -w.minCoeff());
    }
    out.push_back(make_result("paths", "posterior-weight-normalization", worst, 1e-12,
                              "weights stay on the simplex"));
  }
  {
    const OptimalVelocityField field(PathSchedule::ot(), data6);
    const TimeGrid grid = make_grid("geometric", 300, 1e-6);
    const Mat X0 = sample_standard_gaussian(RngSpec{opts.seed, 203}, 2, 200);
    Index hits = 0;
    for (Index j = 0; j < X0.cols(); ++j) {
      const GenerateResult g = generate(field, X0.col(j), grid, data6, OdeMethod::RK4);
      if (g.distance <= 1e-3) ++hits;
    }
    const double miss = 1.0 - static_cast<double>(hits) / static_cast<double>(X0.cols());
    out.push_back(make_result("dynamics", "memorization-mini", miss, 0.005,
                              "endpoints snap to data points within 1e-3"));
  }
}

void check_geometry(std::vector<CheckResult>& out, const VerifyOptions& opts,
                    const DataMatrix& data6) {
  out.push_back(make_result(
      "geometry", "hull-distance-oracle",
      std::abs(convex_distance(square2d(0, 0, 1), square2d(3, 3, 1)) - 2.0 * std::sqrt(2.0)),
      1e-7, "distance between opposite unit squares is 2*sqrt(2)"));
  out.push_back(make_result("geometry", "hull-overlap-zero",
                            convex_distance(square2d(0, 0, 2), square2d(1, 1, 2)), 0.0,
                            "overlapping hulls have zero distance"));

  const std::vector<ConvexRegion> leaves{segment1d(-2.0, -2.0), segment1d(2.0, 2.0)};
  const double t1 = separation_time(segment1d(-1.0, 1.0), leaves);
  out.push_back(make_result("geometry", "separation-time-oracle", std::abs(t1 - 1.0 / 3.0),
                            1e-3, "interval against points at +-2 separates at t = 1/3"));

  out.push_back(make_result("geometry", "concentration-bound-value",
                            std::abs(concentration_bound(0.9, 0.99, 10.0, 6) - 0.8250868075605211),
                            1e-9, "closed-form bound value at the reference arguments"));

  const double M = min_separation(data6);
  double excess = -std::numeric_limits<double>::infinity();
  int cell = 0;
  for (double t : {0.7, 0.9})
    for (double tau : {0.9, 0.99}) {
      const NonconcentrationEstimate est = estimate_nonconcentration(
          t, tau, data6, 20000, RngSpec{opts.seed, 204 + static_cast<std::uint64_t>(cell++)},
          opts.threads);
      excess = std::max(
          excess, est.p_hat - 3.0 * est.std_err - concentration_bound(t, tau, M, data6.count()));
    }
  out.push_back(make_result("geometry", "bound-dominates-sampling", excess, 0.0,
                            "sampled non-concentration never beats the bound by 3 sigma"));
}

void check_osdnet(std::vector<CheckResult>& out, const VerifyOptions& opts,
                  const DataMatrix& cube, const SubspaceBasis& basis) {
  const Index d = cube.dim();
  {
    CounterRng rng(RngSpec{opts.seed, 301});
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Vec x(d);
      for (Index r = 0; r < d; ++r) x(r) = rng.normal();
      const double t = rng.uniform(0.0, 0.95);
      OptimalParams p = optimal_params(t, x, basis, cube);
      p.s_star.array() += opts.perturb_optimal;
      const Vec v = basis.V * p.s_star +
                    p.O_star * (basis.Vperp * (basis.Vperp.transpose() * x));
      err = std::max(err, (v - optimal_velocity(PathSchedule::ot(), x, cube, t)).norm());
    }
    out.push_back(make_result("osdnet", "exact-parameter-identity", err, 1e-9,
                              "decomposed exact parameters rebuild the mixture field"));
  }
  {
    CounterRng rng(RngSpec{opts.seed, 302});
    double err = 0.0;
    for (int i = 0; i < 300; ++i) {
      Vec x(d);
      for (Index r = 0; r < d; ++r) x(r) = rng.normal();
      const double t = rng.uniform(0.0, 0.95);
      const Vec proj = basis.V * (basis.V.transpose() * x);
      err = std::max(err, (optimal_params(t, x, basis, cube).s_star -
                           optimal_params(t, proj, basis, cube).s_star)
                              .norm());
    }
    out.push_back(make_result("osdnet", "projection-invariance", err, 1e-10,
                              "exact subspace coordinates ignore the complement component"));
  }
  {
    const Index off = basis.Vperp.cols();
    McSpec mc;
    mc.samples = 20000;
    mc.rng = RngSpec{opts.seed, 303};
    mc.threads = opts.threads;
    const McEstimate est = loss_O_mc_fn([](double) { return 0.0; }, basis, cube, mc);
    const double gap = std::abs(est.value - static_cast<double>(off));
    out.push_back(make_result("osdnet", "split-route-equivalence", gap / (3.0 * est.std_err),
                              1.0, "sampled and reduced objectives agree within 3 sigma"));
    out.push_back(make_result(
        "osdnet", "reduced-loss-closed-form",
        std::abs(loss_O_exact_fn([](double) { return 0.0; }, off, 256) -
                 static_cast<double>(off)),
        1e-9, "zero dynamics leave exactly the complement dimension"));
  }
  {
    CounterRng rng(RngSpec{opts.seed, 304});
    double err = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vec x(d);
      for (Index r = 0; r < d; ++r) x(r) = rng.normal();
      const EndpointSplit split = endpoint_decompose(x, basis);
      err = std::max(err, std::abs(split.sub.squaredNorm() + split.off.squaredNorm() -
                                   x.squaredNorm()));
    }
    out.push_back(make_result("osdnet", "endpoint-split-orthogonality", err, 1e-10,
                              "the two endpoint components are orthogonal"));
  }
}

void check_gradients(std::vector<CheckResult>& out, const VerifyOptions& opts) {
  const DataMatrix tiny = cube_subspace_dataset(5, 3, 12, RngSpec{opts.seed, 401});
  const SubspaceBasis basis = svd_decompose(tiny);
  NetConfig ncfg;
  ncfg.sub_dim = basis.D;
  ncfg.emb = EmbeddingConfig{5.0, 100.0, 4};
  ncfg.hidden = 8;
  ncfg.blocks = 2;
  const SubspaceNet net = make_net(ncfg, RngSpec{opts.seed, 402});
  McSpec mc;
  mc.samples = 128;
  mc.rng = RngSpec{opts.seed, 403};
  mc.threads = 1;
  const Vec analytic = tst_loss_grad(net, basis, tiny, mc).grad;
  CounterRng pick(RngSpec{opts.seed, 404});
  const Index np = param_count(net);
  double worst = 0.0;
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const auto k = static_cast<Index>(pick.uniform_index(static_cast<std::uint64_t>(np)));
    Vec theta = flatten(net);
    SubspaceNet probe = net;
    theta(k) += h;
    unflatten(theta, probe);
    const double up = tst_loss_s(probe, basis, tiny, mc).value;
    theta(k) -= 2.0 * h;
    unflatten(theta, probe);
    const double dn = tst_loss_s(probe, basis, tiny, mc).value;
    const double fd = (up - dn) / (2.0 * h);
    worst = std::max(worst,
                     std::abs(analytic(k) - fd) / std::max(1e-6, std::abs(analytic(k)) + std::abs(fd)));
  }
  out.push_back(make_result("osdnet", "gradient-check", worst, 1e-4,
                            "reverse-mode network gradient against central differences"));

  // The two decomposed objectives differ from the conditional one by the
  // same constant for any parameters.
  McSpec gap_mc;
  gap_mc.samples = 20000;
  gap_mc.rng = RngSpec{opts.seed, 405};
  gap_mc.threads = opts.threads;
  const SubspaceNet netB = make_net(ncfg, RngSpec{opts.seed, 406});
  const OsdVelocityField fa(basis, tiny, std::nullopt, net);
  const OsdVelocityField fb(basis, tiny, std::nullopt, netB);
  const McEstimate ga = decomposition_gap(fa, tiny, gap_mc);
  const McEstimate gb = decomposition_gap(fb, tiny, gap_mc);
  const double sigma = std::sqrt(ga.std_err * ga.std_err + gb.std_err * gb.std_err);
  out.push_back(make_result("losses", "conditional-split-constancy",
                            std::abs(ga.value - gb.value) / (3.0 * sigma), 1.0,
                            "objective split leaves a parameter-free constant"));
}

void check_quadratic(std::vector<CheckResult>& out) {
  const EmbeddingConfig cfg{1.0, 10000.0, 2};
  const QuadraticData q = compute_quadratic_data(cfg, 64);
  Vec e_ref(2);
  e_ref << 1.0 - std::cos(1.0), std::sin(1.0);
  out.push_back(make_result("quadratic", "feature-integral-oracle", (q.e - e_ref).norm(), 1e-10,
                            "time-feature integral matches its antiderivative"));

  const Vec kl = kappa_limit(q);
  out.push_back(make_result("quadratic", "limit-stationarity", (q.A * kl + q.b).norm(), 1e-10,
                            "the limit point is a stationary point"));

  Vec k0(2);
  k0 << 0.7, -0.3;
  const double e0 = (kappa_flow(0.0, k0, q) - k0).norm();
  const double einf = (kappa_flow(1000.0, k0, q) - kl).norm();
  out.push_back(make_result("quadratic", "flow-endpoint-identity", std::max(e0, einf), 1e-8,
                            "the closed flow starts at kappa0 and ends at the limit"));

  DiagonalField fld;
  fld.cfg = cfg;
  fld.kappa = kl;
  out.push_back(make_result(
      "quadratic", "exp-factor-route-equivalence",
      std::abs(diagonal_exponential(fld, 2048) - offsubspace_limit_factor(q)), 1e-8,
      "quadrature of the trained dynamics equals the closed-form factor"));
}

void check_trainer(std::vector<CheckResult>& out) {
  {
    Vec p(1);
    p << 1.0;
    for (int i = 0; i < 10; ++i) {
      const Vec g = p;
      sgd_step(p, g, 0.1);
    }
    out.push_back(make_result("trainer", "sgd-contraction-oracle",
                              std::abs(p(0) - std::pow(0.9, 10)), 1e-15,
                              "gradient descent on the unit quadratic contracts by 0.9"));
  }
  {
    AdamWConfig cfg;
    cfg.lr = 1e-3;
    double worst = 0.0;
    for (double g0 : {1e-6, 1.0, 1e6}) {
      Vec p = Vec::Zero(1);
      AdamWState st = make_adamw_state(1);
      Vec g(1);
      g << g0;
      adamw_step(p, g, st, cfg);
      worst = std::max(worst, std::abs(std::abs(p(0)) / cfg.lr - 1.0));
    }
    out.push_back(make_result("trainer", "adamw-first-step-scale", worst, 0.02,
                              "first-step magnitude is the learning rate at any scale"));
  }
  {
    std::vector<double> vals(1000);
    CounterRng rng(RngSpec{7, 7});
    for (double& v : vals) v = rng.uniform(0.0, 5.0);
    const Histogram h = make_histogram(vals);
    Index mass = 0;
    for (Index c : h.counts) mass += c;
    out.push_back(make_result("trainer", "histogram-mass-conservation",
                              std::abs(static_cast<double>(mass) - 1000.0), 0.0,
                              "bin mass equals the sample count"));
  }
  {
    Checkpoint cp;
    cp.mode = "offsubspace";
    cp.epoch = 3;
    cp.O.cfg = EmbeddingConfig{1.0, 100.0, 4};
    cp.O.kappa = Vec::LinSpaced(4, -0.3, 0.9);
    cp.metrics.epoch = 3;
    cp.metrics.tst_loss = 1.25;
    cp.metrics.off_norm_mean = 0.5;
    cp.metrics.off_norm_std = 0.1;
    cp.metrics.off_hist = make_histogram({0.4, 0.5, 0.6});
    const std::string path =
        (std::filesystem::temp_directory_path() / "flowlab_verify_ckpt.json").string();
    save_checkpoint(path, cp);
    const std::string first = read_file(path);
    save_checkpoint(path, load_checkpoint(path));
    const std::string second = read_file(path);
    std::remove(path.c_str());
    out.push_back(make_result("trainer", "checkpoint-roundtrip",
                              first == second ? 0.0 : 1.0, 0.0,
                              "save, load, save is byte-identical"));
  }
  {
    CounterRng a(RngSpec{11, 13});
    CounterRng b(RngSpec{11, 13});
    CounterRng c(substream(RngSpec{11, 13}, 1));
    double same = 0.0;
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
      const double va = a.uniform();
      if (va != b.uniform()) same = 1.0;
      if (va != c.uniform()) differs = true;
    }
    if (!differs) same = 1.0;
    out.push_back(make_result("rng", "counter-determinism", same, 0.0,
                              "equal specs replay; substreams do not"));
  }
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  const DataMatrix data6 = sparse_square_dataset(6, 10.0, 5.0, 2, RngSpec{opts.seed, 100});
  const DataMatrix cube = cube_subspace_dataset(12, 4, 30, RngSpec{opts.seed, 101});
  const SubspaceBasis basis = svd_decompose(cube);

  check_schedules(out);
  check_dynamics(out, opts, data6);
  check_geometry(out, opts, data6);
  check_osdnet(out, opts, cube, basis);
  check_gradients(out, opts);
  check_quadratic(out);
  check_trainer(out);
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::string verify_report_text(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  for (const CheckResult& r : results)
    os << (r.pass ? "PASS" : "FAIL") << ' ' << r.module << '.' << r.name
       << "  measured=" << fmt17(r.measured) << "  required<=" << fmt17(r.required) << "  ("
       << r.detail << ")\n";
  os << (all_passed(results) ? "all checks passed" : "SOME CHECKS FAILED") << " ("
     << results.size() << " run)\n";
  return os.str();
}

std::string verify_report_json(const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& r : results) {
    nlohmann::json c;
    c["module"] = r.module;
    c["name"] = r.name;
    c["pass"] = r.pass;
    c["measured"] = r.measured;
    c["required"] = r.required;
    c["detail"] = r.detail;
    checks.push_back(std::move(c));
  }
  nlohmann::json j;
  j["all_pass"] = all_passed(results);
  j["checks"] = std::move(checks);
  return j.dump(2) + "\n";
}

}  // namespace flowlab
