// SPDX-License-Identifier: Apache-2.0
#include "flowlab/osdnet.hpp"

namespace flowlab {

namespace {

const PathSchedule& ot_schedule() {
  static const PathSchedule sched = PathSchedule::ot();
  return sched;
}

void check_basis_dim(const SubspaceBasis& basis, const Vec& x) {
  require(x.size() == basis.V.rows(), "osdnet: point dimension does not match the basis");
}

}  // namespace

Vec osdnet_eval(const Vec& x, double t, const SubspaceBasis& basis, const DiagonalField& O,
                const SubspaceNet& net) {
  check_basis_dim(basis, x);
  O.validate_shapes();
  require(net.cfg.sub_dim == basis.D, "osdnet: net sub_dim must equal the basis rank");
  const Index off_dim = basis.Vperp.cols();
  Vec out = basis.V * net_apply(net, basis.V.transpose() * x, t);
  if (off_dim > 0) {
    const Vec q = basis.Vperp.transpose() * x;
    out.noalias() += basis.Vperp * O.values(t, off_dim).cwiseProduct(q).eval();
  }
  return out;
}

OptimalParams optimal_params(double t, const Vec& x, const SubspaceBasis& basis,
                             const DataMatrix& data) {
  require(t >= 0.0 && t < 1.0, "optimal_params: t must lie in [0,1)");
  check_basis_dim(basis, x);
  OptimalParams p;
  p.O_star = -1.0 / (1.0 - t);
  const Vec w = softmax_weights(ot_schedule(), x, data, t);
  p.s_star = (basis.R * w - basis.V.transpose() * x) / (1.0 - t);
  return p;
}

Mat optimal_subspace_batch(const SubspaceBasis& basis, const DataMatrix& data, const Mat& X,
                           const Vec& ts) {
  require(X.rows() == basis.V.rows(), "optimal_subspace_batch: dimension mismatch");
  const Mat W = softmax_weights_batch(ot_schedule(), X, ts, data);
  Mat S = basis.R * W - basis.V.transpose() * X;
  for (Index j = 0; j < S.cols(); ++j) {
    require(ts(j) < 1.0, "optimal_subspace_batch: t must lie in [0,1)");
    S.col(j) /= 1.0 - ts(j);
  }
  return S;
}

OsdVelocityField::OsdVelocityField(SubspaceBasis basis, DataMatrix data,
                                   std::optional<DiagonalField> O,
                                   std::optional<SubspaceNet> net)
    : basis_(std::move(basis)), data_(std::move(data)), O_(std::move(O)), net_(std::move(net)) {
  require(data_.dim() == basis_.V.rows(), "osdnet field: data/basis dimension mismatch");
  if (O_) O_->validate_shapes();
  if (net_)
    require(net_->cfg.sub_dim == basis_.D, "osdnet field: net sub_dim must equal basis rank");
}

Vec OsdVelocityField::off_values(double t) const {
  const Index off_dim = basis_.Vperp.cols();
  if (O_) return O_->values(t, off_dim);
  return Vec::Constant(off_dim, -1.0 / (1.0 - t));
}

Mat OsdVelocityField::sub_values(const Mat& P, const Mat& X, double t) const {
  if (net_) {
    Mat U(net_->cfg.in_dim(), P.cols());
    U.topRows(basis_.D) = P;
    Vec phi(net_->cfg.emb.dim);
    emb_into(t, net_->cfg.emb, phi.data());
    U.bottomRows(net_->cfg.emb.dim).colwise() = phi;
    return net_forward(*net_, U);
  }
  return optimal_subspace_batch(basis_, data_, X, Vec::Constant(X.cols(), t));
}

Vec OsdVelocityField::at(const Vec& x, double t) const {
  check_basis_dim(basis_, x);
  require(t < 1.0, "osdnet field: t must lie in [0,1)");
  Mat out;
  at_batch(x, t, out);
  return out.col(0);
}

void OsdVelocityField::at_batch(const Mat& X, double t, Mat& out) const {
  require(X.rows() == basis_.V.rows(), "osdnet field: batch dimension mismatch");
  require(t < 1.0, "osdnet field: t must lie in [0,1)");
  const Mat P = basis_.V.transpose() * X;
  out.noalias() = basis_.V * sub_values(P, X, t);
  if (basis_.Vperp.cols() > 0) {
    const Mat Q = basis_.Vperp.transpose() * X;
    out.noalias() += basis_.Vperp * (off_values(t).asDiagonal() * Q);
  }
}

SubspaceDriftField::SubspaceDriftField(SubspaceBasis basis, DataMatrix data,
                                       std::optional<SubspaceNet> net, Vec delta)
    : basis_(std::move(basis)), data_(std::move(data)), net_(std::move(net)),
      delta_(std::move(delta)) {
  require(data_.dim() == basis_.V.rows(), "subspace drift: data/basis dimension mismatch");
  if (net_)
    require(net_->cfg.sub_dim == basis_.D, "subspace drift: net sub_dim must equal basis rank");
  if (delta_.size() > 0)
    require(delta_.size() == basis_.D, "subspace drift: delta must have D entries");
}

Vec SubspaceDriftField::at(const Vec& x, double t) const {
  check_basis_dim(basis_, x);
  require(t < 1.0, "subspace drift: t must lie in [0,1)");
  Vec s = net_ ? net_apply(*net_, basis_.V.transpose() * x, t)
               : optimal_params(t, x, basis_, data_).s_star;
  if (delta_.size() > 0) s += delta_;
  return basis_.V * s;
}

void SubspaceDriftField::at_batch(const Mat& X, double t, Mat& out) const {
  require(X.rows() == basis_.V.rows(), "subspace drift: batch dimension mismatch");
  require(t < 1.0, "subspace drift: t must lie in [0,1)");
  Mat S;
  if (net_) {
    Mat U(net_->cfg.in_dim(), X.cols());
    U.topRows(basis_.D) = basis_.V.transpose() * X;
    Vec phi(net_->cfg.emb.dim);
    emb_into(t, net_->cfg.emb, phi.data());
    U.bottomRows(net_->cfg.emb.dim).colwise() = phi;
    S = net_forward(*net_, U);
  } else {
    S = optimal_subspace_batch(basis_, data_, X, Vec::Constant(X.cols(), t));
  }
  if (delta_.size() > 0) S.colwise() += delta_;
  out.noalias() = basis_.V * S;
}

EndpointSplit endpoint_decompose(const Vec& x_end, const SubspaceBasis& basis) {
  check_basis_dim(basis, x_end);
  EndpointSplit split;
  split.sub = basis.V * (basis.V.transpose() * x_end);
  split.off = x_end - split.sub;
  split.off_norm = split.off.norm();
  return split;
}

}  // namespace flowlab
