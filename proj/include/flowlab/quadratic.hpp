// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "flowlab/diagonal_field.hpp"
#include "flowlab/embedding.hpp"

namespace flowlab {

// Composite Gauss-Legendre quadrature, 8 nodes per panel, on [a, b].
double integrate_gl8(const std::function<double(double)>& f, double a, double b, Index panels);

// The quadratic data of the off-subspace training objective
//   L(kappa) = int_0^1 ((1-t) kappa.emb(t) + 1)^2 dt
//            = kappa' A kappa + 2 b' kappa + 1,
// with A = int (1-t)^2 emb emb' dt, b = int (1-t) emb dt, e = int emb dt.
struct QuadraticData {
  EmbeddingConfig cfg;
  Mat A;
  Vec b;
  Vec e;
  Index panels = 0;        // panel count of the accepted (finer) pass
  double doubling_gap = 0.0;  // max entrywise change when panels were doubled
  double min_eig = 0.0;    // smallest eigenvalue of A
  double max_eig = 0.0;    // largest eigenvalue of A
};

// Integrates A, b, e with `panels` panels and certifies against a pass with
// 2*panels: the entrywise agreement must be below cert_tol or the result is
// rejected.  The finer pass is returned.
QuadraticData compute_quadratic_data(const EmbeddingConfig& cfg, Index panels = 2048,
                                     double cert_tol = 1e-9);

// Minimizer -A^{-1} b of the quadratic, by symmetric factorization; rejects
// near-singular A (eigenvalue ratio above 1e12), for which the truncated
// variant below is the supported route.
Vec kappa_limit(const QuadraticData& q);

// Minimum-norm minimizer restricted to the numerically identifiable
// eigenspace: directions with eigenvalue <= rel_cutoff * max_eig are dropped.
// A has geometrically decaying spectrum for large embedding dims, where the
// unrestricted limit is not computable in double precision (and the ideal
// objective has no finite minimizer as the cutoff vanishes); the retained
// subspace is exactly what gradient descent can traverse in reasonable time.
struct TruncatedLimit {
  Vec kappa;
  Index rank = 0;       // retained eigendirections
  double condition = 0; // max_eig / min_eig of the full spectrum
  double cutoff = 0;    // absolute eigenvalue threshold used
};
TruncatedLimit kappa_limit_truncated(const QuadraticData& q, double rel_cutoff = 1e-4);

// Gradient flow of the quadratic from kappa0:
//   kappa(tau) = exp(-2 A tau) (kappa0 + A^{-1} b) - A^{-1} b,
// evaluated through the eigendecomposition of A.
Vec kappa_flow(double tau, const Vec& kappa0, const QuadraticData& q);

// Multiplier of the complement component at the gradient-flow limit:
// exp(-b' A^{-1} e) = exp(kappa_limit . e).
double offsubspace_limit_factor(const QuadraticData& q);

// exp(kappa . e) for an explicitly supplied coefficient vector (used with the
// truncated limit and with trained coefficients).
double offsubspace_factor(const Vec& kappa, const QuadraticData& q);

// exp(int_0^1 o_t dt) for a shared-mode diagonal field, by quadrature.
double diagonal_exponential(const DiagonalField& O, Index panels = 2048);

// Per-coordinate factors; broadcasts in shared mode.
Vec diagonal_exponential_factors(const DiagonalField& O, Index off_dim, Index panels = 2048);

// Mean squared weighted residual of o_t = kappa.emb against the target
// -1/(1-t) over [0, t_max]:  (1/t_max) int_0^{t_max} ((1-t) o_t + 1)^2 dt.
// This is the yardstick for how well an embedding family can track the
// unbounded target on the bulk of the time axis.
double weighted_target_error(const Vec& kappa, const EmbeddingConfig& cfg, double t_max = 0.9,
                             Index panels = 2048);

}  // namespace flowlab
