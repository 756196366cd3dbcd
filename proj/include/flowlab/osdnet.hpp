// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>

#include "flowlab/diagonal_field.hpp"
#include "flowlab/subspace_net.hpp"
#include "flowlab/velocity.hpp"

namespace flowlab {

// Velocity field split along the data subspace:
//   v(x, t) = Vperp diag(o_t) Vperp' x  +  V s_t(x),
// with o_t a diagonal field on the complement and s_t a network acting on
// (V' x, emb(t)).  The straight conditional path makes the exact field a
// member of this class, with
//   o*_t = -1/(1-t)  and  s*_t(x) = (R w_t(x) - V' x) / (1 - t).
Vec osdnet_eval(const Vec& x, double t, const SubspaceBasis& basis, const DiagonalField& O,
                const SubspaceNet& net);

struct OptimalParams {
  double O_star = 0.0;  // the shared diagonal value -1/(1-t)
  Vec s_star;           // subspace coordinates of the exact field
};

OptimalParams optimal_params(double t, const Vec& x, const SubspaceBasis& basis,
                             const DataMatrix& data);

// Subspace coordinates of the exact field, one column per sample (each with
// its own time).  Equals optimal_params(...).s_star column by column.
Mat optimal_subspace_batch(const SubspaceBasis& basis, const DataMatrix& data, const Mat& X,
                           const Vec& ts);

// Ambient decomposed field with either part swappable for its exact
// counterpart: omitted O uses -1/(1-t), omitted net uses s*.  This is the
// field generation runs on while one part is being trained.
class OsdVelocityField : public VelocityField {
 public:
  OsdVelocityField(SubspaceBasis basis, DataMatrix data, std::optional<DiagonalField> O,
                   std::optional<SubspaceNet> net);

  Index dim() const override { return basis_.V.rows(); }
  Vec at(const Vec& x, double t) const override;
  void at_batch(const Mat& X, double t, Mat& out) const override;

  const SubspaceBasis& basis() const { return basis_; }
  const DataMatrix& data() const { return data_; }
  // Swappable parts; an empty optional stands for the exact counterpart.
  const std::optional<DiagonalField>& off_part() const { return O_; }
  const std::optional<SubspaceNet>& net_part() const { return net_; }

 private:
  Vec off_values(double t) const;  // diagonal entries at time t
  Mat sub_values(const Mat& P, const Mat& X, double t) const;  // s_t per column

  SubspaceBasis basis_;
  DataMatrix data_;
  std::optional<DiagonalField> O_;
  std::optional<SubspaceNet> net_;
};

// Drift V s_t(x) with no off-subspace term: the process whose perturbation
// behavior the error bounds of the subspace analysis quantify.  A constant
// offset delta (in subspace coordinates) can be added to the exact s* to
// realize a controlled field error.
class SubspaceDriftField : public VelocityField {
 public:
  SubspaceDriftField(SubspaceBasis basis, DataMatrix data, std::optional<SubspaceNet> net,
                     Vec delta = Vec());

  Index dim() const override { return basis_.V.rows(); }
  Vec at(const Vec& x, double t) const override;
  void at_batch(const Mat& X, double t, Mat& out) const override;

 private:
  SubspaceBasis basis_;
  DataMatrix data_;
  std::optional<SubspaceNet> net_;
  Vec delta_;
};

// Orthogonal split of a generated endpoint: sub = V V' x, off = x - sub.
struct EndpointSplit {
  Vec sub;
  Vec off;
  double off_norm = 0.0;
};

EndpointSplit endpoint_decompose(const Vec& x_end, const SubspaceBasis& basis);

}  // namespace flowlab
