// SPDX-License-Identifier: Apache-2.0
#include "flowlab/quadratic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace flowlab {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNode[8] = {
    -0.96028985649753623, -0.79666647741362674, -0.52553240991632899, -0.18343464249564980,
    0.18343464249564980,  0.52553240991632899,  0.79666647741362674,  0.96028985649753623};
constexpr double kGlWeight[8] = {
    0.10122853629037626, 0.22238103445337447, 0.31370664587788729, 0.36268378337836198,
    0.36268378337836198, 0.31370664587788729, 0.22238103445337447, 0.10122853629037626};

struct RawQuadratic {
  Mat A;
  Vec b;
  Vec e;
};

RawQuadratic integrate_raw(const EmbeddingConfig& cfg, Index panels) {
  RawQuadratic out;
  out.A = Mat::Zero(cfg.dim, cfg.dim);
  out.b = Vec::Zero(cfg.dim);
  out.e = Vec::Zero(cfg.dim);
  Vec phi(cfg.dim);
  const double h = 1.0 / static_cast<double>(panels);
  for (Index p = 0; p < panels; ++p) {
    const double left = h * static_cast<double>(p);
    for (int n = 0; n < 8; ++n) {
      const double t = left + 0.5 * h * (1.0 + kGlNode[n]);
      const double w = 0.5 * h * kGlWeight[n];
      emb_into(t, cfg, phi.data());
      const double om = 1.0 - t;
      out.A.selfadjointView<Eigen::Lower>().rankUpdate(phi, w * om * om);
      out.b.noalias() += (w * om) * phi;
      out.e.noalias() += w * phi;
    }
  }
  out.A.triangularView<Eigen::StrictlyUpper>() = out.A.transpose();
  return out;
}

}  // namespace

double integrate_gl8(const std::function<double(double)>& f, double a, double b, Index panels) {
  require(panels >= 1, "quadrature needs at least one panel");
  require(b >= a, "quadrature interval is reversed");
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (Index p = 0; p < panels; ++p) {
    const double left = a + h * static_cast<double>(p);
    double panel = 0.0;
    for (int n = 0; n < 8; ++n)
      panel += kGlWeight[n] * f(left + 0.5 * h * (1.0 + kGlNode[n]));
    total += 0.5 * h * panel;
  }
  return total;
}

QuadraticData compute_quadratic_data(const EmbeddingConfig& cfg, Index panels, double cert_tol) {
  validate(cfg);
  require(panels >= 1, "compute_quadratic_data: panels must be >= 1");
  const RawQuadratic coarse = integrate_raw(cfg, panels);
  const RawQuadratic fine = integrate_raw(cfg, 2 * panels);

  double gap = (coarse.A - fine.A).cwiseAbs().maxCoeff();
  gap = std::max(gap, (coarse.b - fine.b).cwiseAbs().maxCoeff());
  gap = std::max(gap, (coarse.e - fine.e).cwiseAbs().maxCoeff());
  check(gap <= cert_tol, "quadrature not converged: doubling the panel count moved entries by " +
                             fmt17(gap) + " > " + fmt17(cert_tol) +
                             "; increase panels for this embedding scale");

  QuadraticData q;
  q.cfg = cfg;
  q.A = 0.5 * (fine.A + fine.A.transpose());  // enforce exact symmetry
  q.b = fine.b;
  q.e = fine.e;
  q.panels = 2 * panels;
  q.doubling_gap = gap;
  Eigen::SelfAdjointEigenSolver<Mat> eig(q.A, Eigen::EigenvaluesOnly);
  q.min_eig = eig.eigenvalues().minCoeff();
  q.max_eig = eig.eigenvalues().maxCoeff();
  return q;
}

Vec kappa_limit(const QuadraticData& q) {
  check(q.max_eig > 0.0, "kappa_limit: A has no positive eigenvalue");
  const double condition = q.max_eig / std::max(q.min_eig, 0.0);
  check(q.min_eig > 0.0 && condition <= 1e12,
        "kappa_limit: A is numerically singular (eigenvalue ratio " + fmt17(condition) +
            "); use the truncated limit for this embedding size");
  return q.A.ldlt().solve(-q.b);
}

TruncatedLimit kappa_limit_truncated(const QuadraticData& q, double rel_cutoff) {
  require(rel_cutoff > 0.0 && rel_cutoff < 1.0, "kappa_limit_truncated: cutoff must be in (0,1)");
  Eigen::SelfAdjointEigenSolver<Mat> eig(q.A);
  check(eig.info() == Eigen::Success, "kappa_limit_truncated: eigendecomposition failed");
  const Vec& lam = eig.eigenvalues();
  const Mat& U = eig.eigenvectors();
  TruncatedLimit out;
  out.cutoff = rel_cutoff * lam.maxCoeff();
  out.condition = lam.maxCoeff() / lam.minCoeff();
  Vec inv = Vec::Zero(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > out.cutoff) {
      inv(i) = 1.0 / lam(i);
      ++out.rank;
    }
  }
  check(out.rank > 0, "kappa_limit_truncated: no eigenvalue above the cutoff");
  out.kappa = -(U * inv.asDiagonal() * (U.transpose() * q.b));
  return out;
}

Vec kappa_flow(double tau, const Vec& kappa0, const QuadraticData& q) {
  require(tau >= 0.0, "kappa_flow: training time must be nonnegative");
  require(kappa0.size() == q.A.rows(), "kappa_flow: kappa0 size mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> eig(q.A);
  check(eig.info() == Eigen::Success, "kappa_flow: eigendecomposition failed");
  const Vec& lam = eig.eigenvalues();
  check(lam.minCoeff() > 0.0, "kappa_flow: A must be positive definite");
  const Mat& U = eig.eigenvectors();
  // In the eigenbasis each mode relaxes independently:
  //   z(tau) = exp(-2 lambda tau) (z0 + beta/lambda) - beta/lambda.
  const Vec z0 = U.transpose() * kappa0;
  const Vec beta = U.transpose() * q.b;
  Vec z(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    const double fixed = -beta(i) / lam(i);
    z(i) = std::exp(-2.0 * lam(i) * tau) * (z0(i) - fixed) + fixed;
  }
  return U * z;
}

double offsubspace_limit_factor(const QuadraticData& q) {
  return std::exp(kappa_limit(q).dot(q.e));
}

double offsubspace_factor(const Vec& kappa, const QuadraticData& q) {
  require(kappa.size() == q.e.size(), "offsubspace_factor: kappa size mismatch");
  return std::exp(kappa.dot(q.e));
}

double diagonal_exponential(const DiagonalField& O, Index panels) {
  O.validate_shapes();
  require(O.shared(), "diagonal_exponential: scalar form needs shared mode; "
                      "use diagonal_exponential_factors for per-entry fields");
  const double integral =
      integrate_gl8([&](double t) { return O.value(t); }, 0.0, 1.0, panels);
  return std::exp(integral);
}

Vec diagonal_exponential_factors(const DiagonalField& O, Index off_dim, Index panels) {
  O.validate_shapes();
  if (O.shared()) return Vec::Constant(off_dim, diagonal_exponential(O, panels));
  require(O.per_entry.rows() == off_dim, "diagonal_exponential_factors: row count mismatch");
  Vec out(off_dim);
  for (Index r = 0; r < off_dim; ++r) {
    const Vec row = O.per_entry.row(r).transpose();
    const double integral = integrate_gl8(
        [&](double t) { return row.dot(emb(t, O.cfg)); }, 0.0, 1.0, panels);
    out(r) = std::exp(integral);
  }
  return out;
}

double weighted_target_error(const Vec& kappa, const EmbeddingConfig& cfg, double t_max,
                             Index panels) {
  validate(cfg);
  require(kappa.size() == cfg.dim, "weighted_target_error: kappa size mismatch");
  require(t_max > 0.0 && t_max < 1.0, "weighted_target_error: t_max must lie in (0,1)");
  Vec phi(cfg.dim);
  const double integral = integrate_gl8(
      [&](double t) {
        emb_into(t, cfg, phi.data());
        const double r = (1.0 - t) * kappa.dot(phi) + 1.0;
        return r * r;
      },
      0.0, t_max, panels);
  return integral / t_max;
}

}  // namespace flowlab
