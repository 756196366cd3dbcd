// SPDX-License-Identifier: Apache-2.0
#include "flowlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flowlab/parallel.hpp"
#include "flowlab/quadratic.hpp"
#include "flowlab/velocity.hpp"

namespace flowlab {

namespace {

// Samples are processed in fixed-size blocks and the per-block partials are
// reduced in index order, so results do not depend on the worker count.
constexpr Index kMcBlock = 1024;

void validate(const McSpec& mc) {
  require(mc.samples >= 1, "sampling plan needs at least one sample");
  require(mc.epsilon > 0.0 && mc.epsilon < 1.0, "sampling plan: epsilon must lie in (0, 1)");
}

// The single definition of draw j; every loss below and mc_sample route
// through it so they all see identical sample sets for a given plan.
template <typename Col>
void draw_sample(const McSpec& mc, Index j, const PathSchedule& sched, const DataMatrix& data,
                 double& t, Index& comp, Col&& x) {
  CounterRng rng(substream(mc.rng, static_cast<std::uint64_t>(j)));
  t = (1.0 - mc.epsilon) * rng.uniform();
  comp = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(data.count())));
  const double m = sched.m(t);
  const double s = sched.sigma(t);
  for (Index r = 0; r < data.dim(); ++r) x(r) = m * data.points(r, comp) + s * rng.normal();
}

struct Block {
  Vec ts;
  std::vector<Index> comps;
  Mat X;
};

Block draw_block(const McSpec& mc, Index j0, Index j1, const PathSchedule& sched,
                 const DataMatrix& data) {
  Block blk;
  const Index n = j1 - j0;
  blk.ts.resize(n);
  blk.comps.resize(static_cast<std::size_t>(n));
  blk.X.resize(data.dim(), n);
  for (Index j = 0; j < n; ++j)
    draw_sample(mc, j0 + j, sched, data, blk.ts(j), blk.comps[static_cast<std::size_t>(j)],
                blk.X.col(j));
  return blk;
}

Index block_count(Index samples) { return (samples + kMcBlock - 1) / kMcBlock; }

void check_pair(const SubspaceBasis& basis, const DataMatrix& data) {
  require(basis.V.rows() == data.dim(), "basis and dataset dimensions differ");
  require(basis.R.cols() == data.count(), "basis coordinates and dataset sizes differ");
}

// Subspace coordinates of the exact straight-path field for one block:
// (R w - V'x) / (1 - t) column by column.
Mat block_s_star(const SubspaceBasis& basis, const DataMatrix& data, const Block& blk,
                 const Mat& P) {
  const PathSchedule sched = PathSchedule::ot();
  const Mat W = softmax_weights_batch(sched, blk.X, blk.ts, data);
  Mat S(P.rows(), P.cols());
  S.noalias() = basis.R * W;
  S -= P;
  for (Index j = 0; j < S.cols(); ++j) S.col(j) /= (1.0 - blk.ts(j));
  return S;
}

Mat block_net_inputs(const SubspaceNet& net, const Mat& P, const Vec& ts) {
  Mat U(net.cfg.in_dim(), P.cols());
  U.topRows(P.rows()) = P;
  U.bottomRows(net.cfg.emb.dim) = emb_batch(ts, net.cfg.emb);
  return U;
}

ValueGrad tst_core(const SubspaceNet& net, const SubspaceBasis& basis, const DataMatrix& data,
                   const McSpec& mc, bool with_grad) {
  validate(mc);
  check_pair(basis, data);
  require(net.cfg.sub_dim == basis.R.rows(), "network width and subspace rank differ");
  const PathSchedule sched = PathSchedule::ot();
  const Index n = mc.samples;
  const Index nblocks = block_count(n);
  std::vector<double> vals(static_cast<std::size_t>(n));
  std::vector<Vec> partial;
  if (with_grad) partial.assign(static_cast<std::size_t>(nblocks), Vec());

  parallel_for(nblocks, mc.threads, [&](std::int64_t b) {
    const Index j0 = static_cast<Index>(b) * kMcBlock;
    const Index j1 = std::min(n, j0 + kMcBlock);
    const Block blk = draw_block(mc, j0, j1, sched, data);
    Mat P(basis.R.rows(), j1 - j0);
    P.noalias() = basis.V.transpose() * blk.X;
    const Mat S_star = block_s_star(basis, data, blk, P);
    const Mat U = block_net_inputs(net, P, blk.ts);
    NetCache cache;
    Mat resid = with_grad ? net_forward_cached(net, U, cache) : net_forward(net, U);
    resid -= S_star;
    for (Index j = 0; j < resid.cols(); ++j)
      vals[static_cast<std::size_t>(j0 + j)] = resid.col(j).squaredNorm();
    if (with_grad) {
      resid *= 2.0 / static_cast<double>(n);
      partial[static_cast<std::size_t>(b)] = net_backward(net, cache, resid, nullptr);
    }
  });

  ValueGrad out;
  out.loss = reduce_estimate(vals);
  if (with_grad) {
    out.grad = Vec::Zero(param_count(net));
    for (const Vec& g : partial) out.grad += g;
  }
  return out;
}

OGrad lossO_core(const DiagonalField& O, const SubspaceBasis& basis, const DataMatrix& data,
                 const McSpec& mc, bool with_grad) {
  validate(mc);
  check_pair(basis, data);
  O.validate_shapes();
  const Index off_dim = basis.Vperp.cols();
  require(off_dim >= 1, "off-subspace objective needs a nontrivial complement");
  if (!O.shared())
    require(O.per_entry.rows() == off_dim, "per-entry coefficient rows must match d - D");
  const PathSchedule sched = PathSchedule::ot();
  const Index n = mc.samples;
  const Index nblocks = block_count(n);
  std::vector<double> vals(static_cast<std::size_t>(n));
  std::vector<Vec> shared_partial;
  std::vector<Mat> entry_partial;
  if (with_grad) {
    if (O.shared())
      shared_partial.assign(static_cast<std::size_t>(nblocks), Vec());
    else
      entry_partial.assign(static_cast<std::size_t>(nblocks), Mat());
  }
  // Gradient of loss / off_dim (see header); the 2 is from the square.
  const double gscale = 2.0 / (static_cast<double>(n) * static_cast<double>(off_dim));

  parallel_for(nblocks, mc.threads, [&](std::int64_t b) {
    const Index j0 = static_cast<Index>(b) * kMcBlock;
    const Index j1 = std::min(n, j0 + kMcBlock);
    const Block blk = draw_block(mc, j0, j1, sched, data);
    const Index cols = j1 - j0;
    Mat Q(off_dim, cols);
    Q.noalias() = basis.Vperp.transpose() * blk.X;
    const Mat Phi = emb_batch(blk.ts, O.cfg);
    Vec inv1mt(cols);
    for (Index j = 0; j < cols; ++j) inv1mt(j) = 1.0 / (1.0 - blk.ts(j));

    if (O.shared()) {
      Vec resid = Phi.transpose() * O.kappa;  // o(t_j)
      resid += inv1mt;
      Vec q2(cols);
      for (Index j = 0; j < cols; ++j) q2(j) = Q.col(j).squaredNorm();
      for (Index j = 0; j < cols; ++j)
        vals[static_cast<std::size_t>(j0 + j)] = resid(j) * resid(j) * q2(j);
      if (with_grad)
        shared_partial[static_cast<std::size_t>(b)] =
            gscale * (Phi * resid.cwiseProduct(q2));
    } else {
      Mat resid(off_dim, cols);
      resid.noalias() = O.per_entry * Phi;
      resid.array().rowwise() += inv1mt.transpose().array();
      const Mat q2 = Q.array().square().matrix();
      for (Index j = 0; j < cols; ++j)
        vals[static_cast<std::size_t>(j0 + j)] =
            (resid.col(j).array().square() * q2.col(j).array()).sum();
      if (with_grad)
        entry_partial[static_cast<std::size_t>(b)] =
            gscale * (resid.cwiseProduct(q2) * Phi.transpose());
    }
  });

  OGrad out;
  out.loss = reduce_estimate(vals);
  if (with_grad) {
    if (O.shared()) {
      out.shared_grad = Vec::Zero(O.cfg.dim);
      for (const Vec& g : shared_partial) out.shared_grad += g;
    } else {
      out.per_entry_grad = Mat::Zero(off_dim, O.cfg.dim);
      for (const Mat& g : entry_partial) out.per_entry_grad += g;
    }
  }
  return out;
}

}  // namespace

McSample mc_sample(const McSpec& mc, Index j, const PathSchedule& sched, const DataMatrix& data) {
  validate(mc);
  require(j >= 0 && j < mc.samples, "sample index outside the plan");
  McSample s;
  s.x.resize(data.dim());
  draw_sample(mc, j, sched, data, s.t, s.component, s.x);
  return s;
}

McEstimate reduce_estimate(const std::vector<double>& vals) {
  require(!vals.empty(), "estimate needs at least one sample");
  const auto n = static_cast<double>(vals.size());
  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  McEstimate est;
  est.value = mean;
  est.std_err = vals.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  est.samples = static_cast<Index>(vals.size());
  return est;
}

McEstimate tst_loss_s(const SubspaceNet& net, const SubspaceBasis& basis, const DataMatrix& data,
                      const McSpec& mc) {
  return tst_core(net, basis, data, mc, false).loss;
}

ValueGrad tst_loss_grad(const SubspaceNet& net, const SubspaceBasis& basis,
                        const DataMatrix& data, const McSpec& mc) {
  return tst_core(net, basis, data, mc, true);
}

McEstimate loss_O_mc(const DiagonalField& O, const SubspaceBasis& basis, const DataMatrix& data,
                     const McSpec& mc) {
  return lossO_core(O, basis, data, mc, false).loss;
}

OGrad loss_O_grad(const DiagonalField& O, const SubspaceBasis& basis, const DataMatrix& data,
                  const McSpec& mc) {
  return lossO_core(O, basis, data, mc, true);
}

double loss_O_exact(const DiagonalField& O, Index off_dim, Index panels) {
  O.validate_shapes();
  require(off_dim >= 1, "complement dimension must be positive");
  if (!O.shared())
    require(O.per_entry.rows() == off_dim, "per-entry coefficient rows must match d - D");
  Vec e(O.cfg.dim);
  const auto integrand = [&](double t) {
    emb_into(t, O.cfg, e.data());
    const double w = 1.0 - t;
    if (O.shared()) {
      const double r = w * O.kappa.dot(e) + 1.0;
      return static_cast<double>(off_dim) * r * r;
    }
    double acc = 0.0;
    for (Index r = 0; r < off_dim; ++r) {
      const double v = w * O.per_entry.row(r).dot(e) + 1.0;
      acc += v * v;
    }
    return acc;
  };
  return integrate_gl8(integrand, 0.0, 1.0, panels);
}

McEstimate loss_O_mc_fn(const std::function<double(double)>& o, const SubspaceBasis& basis,
                        const DataMatrix& data, const McSpec& mc) {
  validate(mc);
  check_pair(basis, data);
  const Index off_dim = basis.Vperp.cols();
  require(off_dim >= 1, "off-subspace objective needs a nontrivial complement");
  const PathSchedule sched = PathSchedule::ot();
  const Index n = mc.samples;
  const Index nblocks = block_count(n);
  std::vector<double> vals(static_cast<std::size_t>(n));
  parallel_for(nblocks, mc.threads, [&](std::int64_t b) {
    const Index j0 = static_cast<Index>(b) * kMcBlock;
    const Index j1 = std::min(n, j0 + kMcBlock);
    const Block blk = draw_block(mc, j0, j1, sched, data);
    Mat Q(off_dim, j1 - j0);
    Q.noalias() = basis.Vperp.transpose() * blk.X;
    for (Index j = 0; j < Q.cols(); ++j) {
      const double r = o(blk.ts(j)) + 1.0 / (1.0 - blk.ts(j));
      vals[static_cast<std::size_t>(j0 + j)] = r * r * Q.col(j).squaredNorm();
    }
  });
  return reduce_estimate(vals);
}

double loss_O_exact_fn(const std::function<double(double)>& o, Index off_dim, Index panels) {
  require(off_dim >= 1, "complement dimension must be positive");
  const auto integrand = [&](double t) {
    const double r = (1.0 - t) * o(t) + 1.0;
    return static_cast<double>(off_dim) * r * r;
  };
  return integrate_gl8(integrand, 0.0, 1.0, panels);
}

McEstimate cfm_loss(const OsdVelocityField& field, const PathSchedule& sched,
                    const DataMatrix& data, const McSpec& mc) {
  validate(mc);
  const SubspaceBasis& basis = field.basis();
  check_pair(basis, data);
  const Index off_dim = basis.Vperp.cols();
  const Index n = mc.samples;
  const Index nblocks = block_count(n);
  std::vector<double> vals(static_cast<std::size_t>(n));

  parallel_for(nblocks, mc.threads, [&](std::int64_t b) {
    const Index j0 = static_cast<Index>(b) * kMcBlock;
    const Index j1 = std::min(n, j0 + kMcBlock);
    const Block blk = draw_block(mc, j0, j1, sched, data);
    const Index cols = j1 - j0;
    Mat P(basis.R.rows(), cols);
    P.noalias() = basis.V.transpose() * blk.X;
    Mat Q(off_dim, cols);
    Q.noalias() = basis.Vperp.transpose() * blk.X;

    // Field parts (an omitted part means the exact straight-path one).
    Mat S_hat;
    if (field.net_part()) {
      const Mat U = block_net_inputs(*field.net_part(), P, blk.ts);
      S_hat = net_forward(*field.net_part(), U);
    } else {
      S_hat = block_s_star(basis, data, blk, P);
    }
    Mat o_vals(off_dim, cols);
    if (field.off_part()) {
      for (Index j = 0; j < cols; ++j)
        o_vals.col(j) = field.off_part()->values(blk.ts(j), off_dim);
    } else {
      for (Index j = 0; j < cols; ++j)
        o_vals.col(j).setConstant(-1.0 / (1.0 - blk.ts(j)));
    }

    // Conditional velocity in the split coordinates:
    //   V'u = (sigma'/sigma) (P - m R_c) + m' R_c,  Vperp'u = (sigma'/sigma) Q,
    // using that the data points have no complement component.
    for (Index j = 0; j < cols; ++j) {
      const double t = blk.ts(j);
      const double ratio = sched.dsigma(t) / sched.sigma(t);
      const double m = sched.m(t);
      const double dm = sched.dm(t);
      const Vec rc = basis.R.col(blk.comps[static_cast<std::size_t>(j)]);
      const double sub = (S_hat.col(j) - ratio * (P.col(j) - m * rc) - dm * rc).squaredNorm();
      const double off = ((o_vals.col(j).array() - ratio) * Q.col(j).array()).square().sum();
      vals[static_cast<std::size_t>(j0 + j)] = sub + off;
    }
  });

  return reduce_estimate(vals);
}

McEstimate decomposition_gap(const OsdVelocityField& field, const DataMatrix& data,
                             const McSpec& mc) {
  validate(mc);
  const SubspaceBasis& basis = field.basis();
  check_pair(basis, data);
  const PathSchedule sched = PathSchedule::ot();
  const Index n = mc.samples;
  const Index nblocks = block_count(n);
  std::vector<double> vals(static_cast<std::size_t>(n));

  parallel_for(nblocks, mc.threads, [&](std::int64_t b) {
    const Index j0 = static_cast<Index>(b) * kMcBlock;
    const Index j1 = std::min(n, j0 + kMcBlock);
    const Block blk = draw_block(mc, j0, j1, sched, data);
    const Index cols = j1 - j0;
    Mat P(basis.R.rows(), cols);
    P.noalias() = basis.V.transpose() * blk.X;
    const Mat S_star = block_s_star(basis, data, blk, P);
    Mat S_hat;
    if (field.net_part()) {
      const Mat U = block_net_inputs(*field.net_part(), P, blk.ts);
      S_hat = net_forward(*field.net_part(), U);
    } else {
      S_hat = S_star;
    }
    // The off-subspace residuals of the two routes cancel exactly, leaving
    // ||s_hat - conditional||^2 - ||s_hat - s*||^2.
    for (Index j = 0; j < cols; ++j) {
      const double inv = 1.0 / (1.0 - blk.ts(j));
      const Vec cond = inv * (basis.R.col(blk.comps[static_cast<std::size_t>(j)]) - P.col(j));
      vals[static_cast<std::size_t>(j0 + j)] =
          (S_hat.col(j) - cond).squaredNorm() - (S_hat.col(j) - S_star.col(j)).squaredNorm();
    }
  });

  return reduce_estimate(vals);
}

}  // namespace flowlab
