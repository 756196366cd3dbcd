// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "flowlab/common.hpp"

namespace flowlab {

// Sinusoidal time embedding: dim/2 geometrically spaced frequencies
//   omega_k = s / ell^(2k/dim),  k = 0 .. dim/2 - 1,
// interleaved as entry 2k = sin(omega_k t), entry 2k+1 = cos(omega_k t).
struct EmbeddingConfig {
  double s = 1000.0;
  double ell = 10000.0;
  Index dim = 256;
};

void validate(const EmbeddingConfig& cfg);

// The dim/2 frequencies omega_k.
Vec emb_frequencies(const EmbeddingConfig& cfg);

Vec emb(double t, const EmbeddingConfig& cfg);

// Allocation-free variant for hot loops; out must hold cfg.dim doubles.
void emb_into(double t, const EmbeddingConfig& cfg, double* out);

// Column j is emb(ts(j)); shape dim x n.
Mat emb_batch(const Vec& ts, const EmbeddingConfig& cfg);

}  // namespace flowlab
