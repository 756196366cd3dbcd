// SPDX-License-Identifier: Apache-2.0
#include "flowlab/optim.hpp"

#include <cmath>

namespace flowlab {

double clip_global_norm(Vec& grad, double max_norm) {
  require(max_norm > 0.0, "clip threshold must be positive");
  const double norm = grad.norm();
  if (std::isfinite(norm) && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

bool sgd_step(Vec& params, const Vec& grad, double lr) {
  require(params.size() == grad.size(), "parameter and gradient sizes differ");
  require(lr > 0.0, "learning rate must be positive");
  if (!grad.allFinite()) return false;
  params -= lr * grad;
  return true;
}

AdamWState make_adamw_state(Index n) {
  AdamWState st;
  st.m = Vec::Zero(n);
  st.v = Vec::Zero(n);
  st.step = 0;
  return st;
}

bool adamw_step(Vec& params, const Vec& grad, AdamWState& state, const AdamWConfig& cfg) {
  require(params.size() == grad.size(), "parameter and gradient sizes differ");
  require(state.m.size() == params.size() && state.v.size() == params.size(),
          "optimizer state size mismatch");
  require(cfg.lr > 0.0, "learning rate must be positive");
  require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0,
          "moment decay rates must lie in [0, 1)");
  if (!grad.allFinite()) return false;

  state.step += 1;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params -= cfg.lr * cfg.weight_decay * params;
  params -= (cfg.lr / bc1) *
            (state.m.array() / ((state.v / bc2).array().sqrt() + cfg.eps)).matrix();
  return true;
}

}  // namespace flowlab
