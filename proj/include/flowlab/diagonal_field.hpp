// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "flowlab/embedding.hpp"

namespace flowlab {

// Diagonal off-subspace dynamics o_t = kappa . emb(t), applied to all d-D
// complement coordinates.  By default one coefficient vector is shared across
// the diagonal (the target -1/(1-t) is entry-independent); `per_entry` holds
// one row of coefficients per diagonal entry when entries train separately.
struct DiagonalField {
  EmbeddingConfig cfg;
  Vec kappa;      // shared coefficients, size cfg.dim
  Mat per_entry;  // optional (off_dim x cfg.dim); empty selects shared mode

  bool shared() const { return per_entry.size() == 0; }

  void validate_shapes() const {
    validate(cfg);
    if (shared())
      require(kappa.size() == cfg.dim, "diagonal field: kappa size must equal embedding dim");
    else
      require(per_entry.cols() == cfg.dim,
              "diagonal field: per-entry coefficient rows must have embedding dim columns");
  }

  // Shared-mode diagonal value at time t.
  double value(double t) const {
    require(shared(), "diagonal field: value() needs shared mode");
    return kappa.dot(emb(t, cfg));
  }

  // One diagonal value per complement coordinate (broadcast in shared mode).
  Vec values(double t, Index off_dim) const {
    const Vec e = emb(t, cfg);
    if (shared()) return Vec::Constant(off_dim, kappa.dot(e));
    require(per_entry.rows() == off_dim, "diagonal field: per-entry row count mismatch");
    return per_entry * e;
  }
};

}  // namespace flowlab
