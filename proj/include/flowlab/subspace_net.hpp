// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "flowlab/embedding.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

// Residual MLP mapping (subspace coordinates, time features) -> subspace
// velocity coordinates: a stem affine layer into `hidden` units, `blocks`
// residual blocks (affine -> softplus -> affine, added to the block input),
// and an affine head back to sub_dim.
struct NetConfig {
  Index sub_dim = 0;    // coordinate count D of the data subspace
  EmbeddingConfig emb;  // time features concatenated onto the input
  Index hidden = 256;
  Index blocks = 2;

  Index in_dim() const { return sub_dim + emb.dim; }
};

struct SubspaceNet {
  NetConfig cfg;
  Mat W_in;
  Vec b_in;
  std::vector<Mat> W1, W2;  // per block: pre- and post-activation affines
  std::vector<Vec> b1, b2;
  Mat W_out;
  Vec b_out;
};

// Weights drawn uniform with variance 2 / fan_in, biases zero.
SubspaceNet make_net(const NetConfig& cfg, const RngSpec& rng);

Index param_count(const SubspaceNet& net);

// Flat parameter vector in a fixed order (stem, blocks in order, head); the
// optimizer works on this view and unflatten writes it back.
Vec flatten(const SubspaceNet& net);
void unflatten(const Vec& theta, SubspaceNet& net);

// Forward pass on a batch: column j of U is one input (x_sub ++ emb(t)).
Mat net_forward(const SubspaceNet& net, const Mat& U);

// Single-sample convenience wrapper that builds the input from (x_sub, t).
Vec net_apply(const SubspaceNet& net, const Vec& x_sub, double t);

// Intermediate activations of one batched forward pass, kept for backward.
struct NetCache {
  Mat U;               // inputs
  std::vector<Mat> h;  // h[0] = stem output, h[k+1] = block k output
  std::vector<Mat> z;  // per block: pre-activation
  std::vector<Mat> a;  // per block: softplus(z)
};

Mat net_forward_cached(const SubspaceNet& net, const Mat& U, NetCache& cache);

// Gradient of sum_j <upstream_j, f(U_j)> with respect to the flat parameters.
// When input_grads is non-null it also receives d/dU (same shape as U).
Vec net_backward(const SubspaceNet& net, const NetCache& cache, const Mat& upstream,
                 Mat* input_grads = nullptr);

// Checkpoint fragment: config, shapes, and flat weights; numbers round-trip
// exactly through the JSON writer.
std::string net_to_json(const SubspaceNet& net);
SubspaceNet net_from_json(const std::string& text);

// Numerically stable softplus and its derivative (the logistic function).
double softplus(double z);
double softplus_prime(double z);

}  // namespace flowlab
