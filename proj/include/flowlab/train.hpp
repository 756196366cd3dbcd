// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "flowlab/data.hpp"
#include "flowlab/diagonal_field.hpp"
#include "flowlab/losses.hpp"
#include "flowlab/optim.hpp"
#include "flowlab/subspace_net.hpp"

namespace flowlab {

// One optimizer step per epoch on a fresh Monte-Carlo batch (how an "epoch"
// maps onto batches is a convention; this one is recorded in run manifests).
// All randomness derives from `rng`: parameter init uses substream(rng, 0),
// the batch of epoch e uses substream(substream(rng, 1), e), and checkpoint
// generation always uses the frozen substream(rng, 2) -- so metric curves
// reflect parameter change only, and a resumed run replays the identical
// draws of an uninterrupted one.
struct TrainConfig {
  std::string optimizer = "sgd";  // sgd | adamw
  double learning_rate = 0.1;
  Index epochs = 1;
  Index batch = 1024;
  Index checkpoint_every = 0;  // 0: record only the initial and final epochs
  double epsilon = 1e-3;       // terminal gap of the t-sampler and metric flows
  RngSpec rng{0, 0};
  int threads = 1;
  double clip_norm = 10.0;       // global-norm gradient clip (1/(1-t) spikes)
  Index metric_samples = 10000;  // endpoints generated per checkpoint
  Index metric_steps = 100;      // Euler steps of the checkpoint flows
  AdamWConfig adamw;             // moment/decay knobs when optimizer == adamw
};

void validate(const TrainConfig& cfg);

// Epochs with recorded metrics: 0, every positive multiple of
// checkpoint_every, and the final epoch.
std::vector<Index> checkpoint_epochs(const TrainConfig& cfg);

struct Histogram {
  Vec edges;                  // bins + 1 ascending edges, starting at 0
  std::vector<Index> counts;  // mass sums to the sample count
};

Histogram make_histogram(const std::vector<double>& vals, Index bins = 40);

struct CheckpointMetrics {
  Index epoch = 0;
  double tst_loss = 0.0;       // training objective on that epoch's batch
  double off_norm_mean = 0.0;  // complement norm of generated endpoints
  double off_norm_std = 0.0;
  Histogram off_hist;
  // Paired squared distance to the exact field's endpoints (subspace runs).
  double mse_to_optimal = std::numeric_limits<double>::quiet_NaN();
  // Mean distance of generated endpoints to their nearest data point.
  double nearest_mean = std::numeric_limits<double>::quiet_NaN();
  bool flagged = false;  // a non-finite gradient was skipped since last record
};

// "epoch,loss,off_norm_mean,off_norm_std,mse" rows, 17 significant digits.
std::string metrics_csv(const std::vector<CheckpointMetrics>& history);

// One checkpoint's off-norm histogram with explicit bin edges.
std::string histogram_json(const CheckpointMetrics& m);

struct OffsubspaceResult {
  std::vector<CheckpointMetrics> history;
  DiagonalField O;
  AdamWState opt;  // final optimizer state; meaningful when has_opt
  bool has_opt = false;
  bool diverged = false;
  std::string note;  // diagnostics when training aborted
};

struct SubspaceResult {
  std::vector<CheckpointMetrics> history;
  SubspaceNet net;
  AdamWState opt;
  bool has_opt = false;
  bool diverged = false;
  std::string note;
};

// Checkpoint file contents: parameters, optimizer state, and the metrics
// recorded at `epoch`.  The JSON round-trip is byte-identical.
struct Checkpoint {
  int version = 1;
  std::string mode;  // "offsubspace" | "subspace"
  Index epoch = 0;
  DiagonalField O;  // mode == offsubspace
  SubspaceNet net;  // mode == subspace
  AdamWState opt;
  bool has_opt = false;
  CheckpointMetrics metrics;
};

void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

// Trains the complement diagonal on the off-subspace objective with the
// subspace part held exact.  Without `init` the field trains one coefficient
// row per complement coordinate, all starting at zero (a shared-coefficient
// `init` is honored; note the shared gradient is off_dim times steeper, so
// it needs a correspondingly smaller learning rate).  At each checkpoint the
// mixed field flows the frozen Gaussian starts to t = 1-epsilon and the
// complement norms of the endpoints are recorded.  A loss above 10x its
// initial value aborts with the history collected so far.
OffsubspaceResult train_offsubspace(const DataMatrix& data, const SubspaceBasis& basis,
                                    const EmbeddingConfig& emb, const TrainConfig& cfg,
                                    const DiagonalField* init = nullptr,
                                    const Checkpoint* resume = nullptr);

// Trains the subspace network on the teacher-student objective with the
// complement part held exact.  Checkpoints additionally record the mean
// squared error between endpoints generated by the learned field and by the
// exact field from identical starts, and the mean nearest-data distance of
// the learned endpoints.
SubspaceResult train_subspace(const DataMatrix& data, const SubspaceBasis& basis,
                              const NetConfig& ncfg, const TrainConfig& cfg,
                              const SubspaceNet* init = nullptr,
                              const Checkpoint* resume = nullptr);

}  // namespace flowlab
