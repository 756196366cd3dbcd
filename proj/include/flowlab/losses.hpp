// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "flowlab/data.hpp"
#include "flowlab/diagonal_field.hpp"
#include "flowlab/osdnet.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/schedule.hpp"
#include "flowlab/subspace_net.hpp"

namespace flowlab {

// Monte-Carlo plan for the training losses: `samples` draws of (t, c, x)
// with t ~ U[0, 1 - epsilon], c a uniform mixture component, and
// x = m(t) y_c + sigma(t) xi, xi ~ N(0, I).  Draw j comes from
// substream(rng, j), so it depends only on (rng, j) -- never on batch size,
// thread count, or evaluation order.
struct McSpec {
  Index samples = 100000;
  double epsilon = 1e-3;  // keeps the 1/(1-t) targets finite
  RngSpec rng{0, 0};
  int threads = 1;
};

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;  // sample standard deviation / sqrt(samples)
  Index samples = 0;
};

// One draw of the loss sampler, exposed so tests can replay the exact sample
// set behind an estimate and evaluate the integrand by an independent route.
struct McSample {
  double t = 0.0;
  Index component = 0;
  Vec x;
};

McSample mc_sample(const McSpec& mc, Index j, const PathSchedule& sched, const DataMatrix& data);

// Mean and standard error of per-sample values, reduced in index order.
McEstimate reduce_estimate(const std::vector<double>& vals);

// Teacher-student objective of the subspace part:
//   E || s_hat(V' x, t) - s*(x, t) ||^2
// (V orthonormal, so the ambient V factor drops from the norm).
McEstimate tst_loss_s(const SubspaceNet& net, const SubspaceBasis& basis, const DataMatrix& data,
                      const McSpec& mc);

// Off-subspace objective, sampled route:
//   E || (diag(o_t) + I/(1-t)) Vperp' x ||^2.
McEstimate loss_O_mc(const DiagonalField& O, const SubspaceBasis& basis, const DataMatrix& data,
                     const McSpec& mc);

// Off-subspace objective, reduced route: because Vperp' x ~ N(0, (1-t)^2 I)
// under the straight-path mixture, the expectation collapses to
//   integral_0^1 sum_r ((1-t) o_r(t) + 1)^2 dt,
// evaluated by composite 8-node Gauss-Legendre quadrature over `panels`
// panels.  off_dim is the complement dimension d - D.
double loss_O_exact(const DiagonalField& O, Index off_dim, Index panels = 2048);

// Function forms of the same two routes, for scalar dynamics o(t) applied to
// every complement entry.  They admit reference instances the coefficient
// parameterization cannot express exactly -- a constant, or -1/(1-t) itself.
McEstimate loss_O_mc_fn(const std::function<double(double)>& o, const SubspaceBasis& basis,
                        const DataMatrix& data, const McSpec& mc);
double loss_O_exact_fn(const std::function<double(double)>& o, Index off_dim,
                       Index panels = 2048);

// Conditional-target objective over the ambient field:
//   E || v(x, t) - u_t(x | y_c) ||^2
// with (t, c, x) from mc_sample.  The residual is accumulated in the split
// basis (V, Vperp), which is exact because the two ranges are orthogonal
// complements.
McEstimate cfm_loss(const OsdVelocityField& field, const PathSchedule& sched,
                    const DataMatrix& data, const McSpec& mc);

// Per-sample difference between the conditional-target objective and the sum
// of the two decomposed objectives, on the same draws (straight path).  Its
// mean is parameter-independent -- the conditional target averages to the
// exact field -- so estimates for different parameter settings must agree
// within Monte-Carlo error.
McEstimate decomposition_gap(const OsdVelocityField& field, const DataMatrix& data,
                             const McSpec& mc);

// Objective value together with its parameter gradient.
struct ValueGrad {
  McEstimate loss;
  Vec grad;
};

// Gradient of tst_loss_s with respect to the flat network parameters.
ValueGrad tst_loss_grad(const SubspaceNet& net, const SubspaceBasis& basis,
                        const DataMatrix& data, const McSpec& mc);

// Off-subspace objective with gradient.  The reported loss is the summed
// form of loss_O_mc; the gradient is taken of loss / off_dim (the per-entry
// average), which keeps one learning rate stable across complement sizes --
// the summed gradient grows linearly with d - D.  shared_grad is filled in
// shared mode (size cfg.dim), per_entry_grad otherwise (off_dim x cfg.dim).
struct OGrad {
  McEstimate loss;
  Vec shared_grad;
  Mat per_entry_grad;
};

OGrad loss_O_grad(const DiagonalField& O, const SubspaceBasis& basis, const DataMatrix& data,
                  const McSpec& mc);

}  // namespace flowlab
