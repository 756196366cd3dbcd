// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "flowlab/common.hpp"

namespace flowlab {

// Rescales grad in place so its Euclidean norm is at most max_norm; returns
// the pre-clip norm.  Non-finite entries are left for the step functions to
// reject (the norm is reported as computed).
double clip_global_norm(Vec& grad, double max_norm);

// p <- p - lr * g.  Returns false and leaves params untouched when the
// gradient has a non-finite entry, so a caller can skip the step and flag it.
bool sgd_step(Vec& params, const Vec& grad, double lr);

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;  // decoupled: applied to the parameters, not the moments
};

struct AdamWState {
  Vec m;  // first moment
  Vec v;  // second moment
  std::int64_t step = 0;
};

AdamWState make_adamw_state(Index n);

// Decoupled-decay update with bias-corrected moments:
//   p <- p - lr * decay * p - lr * m_hat / (sqrt(v_hat) + eps).
// Returns false and leaves params and state untouched on a non-finite
// gradient.
bool adamw_step(Vec& params, const Vec& grad, AdamWState& state, const AdamWConfig& cfg);

}  // namespace flowlab
