// SPDX-License-Identifier: Apache-2.0
#include "flowlab/embedding.hpp"

#include <cmath>

namespace flowlab {

void validate(const EmbeddingConfig& cfg) {
  require(cfg.dim >= 2 && cfg.dim % 2 == 0, "embedding dim must be an even integer >= 2");
  require(cfg.s > 0.0, "embedding scale s must be positive");
  require(cfg.ell > 1.0, "embedding wavelength ell must exceed 1");
}

Vec emb_frequencies(const EmbeddingConfig& cfg) {
  validate(cfg);
  const Index half = cfg.dim / 2;
  // omega_{k+1} = omega_k * ell^(-2/dim): one multiply per frequency instead
  // of a pow per entry.
  const double ratio = std::exp(-2.0 * std::log(cfg.ell) / static_cast<double>(cfg.dim));
  Vec omega(half);
  double w = cfg.s;
  for (Index k = 0; k < half; ++k) {
    omega(k) = w;
    w *= ratio;
  }
  return omega;
}

void emb_into(double t, const EmbeddingConfig& cfg, double* out) {
  const double ratio = std::exp(-2.0 * std::log(cfg.ell) / static_cast<double>(cfg.dim));
  double w = cfg.s;
  for (Index k = 0; k < cfg.dim / 2; ++k) {
    const double a = w * t;
    out[2 * k] = std::sin(a);
    out[2 * k + 1] = std::cos(a);
    w *= ratio;
  }
}

Vec emb(double t, const EmbeddingConfig& cfg) {
  validate(cfg);
  require(t >= 0.0 && t <= 1.0, "embedding time must lie in [0,1]");
  Vec out(cfg.dim);
  emb_into(t, cfg, out.data());
  return out;
}

Mat emb_batch(const Vec& ts, const EmbeddingConfig& cfg) {
  validate(cfg);
  Mat out(cfg.dim, ts.size());
  for (Index j = 0; j < ts.size(); ++j) {
    require(ts(j) >= 0.0 && ts(j) <= 1.0, "embedding time must lie in [0,1]");
    emb_into(ts(j), cfg, out.col(j).data());
  }
  return out;
}

}  // namespace flowlab
