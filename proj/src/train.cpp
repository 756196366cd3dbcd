// SPDX-License-Identifier: Apache-2.0
#include "flowlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "flowlab/integrate.hpp"
#include "flowlab/io.hpp"
#include "flowlab/json_util.hpp"
#include "flowlab/osdnet.hpp"

namespace flowlab {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vec vec_from_json(const json& j, const std::string& name) {
  require(j.is_array(), name + " must be an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), name + " entries must be numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

json optional_real(double v) {
  if (std::isnan(v)) return json();  // null marks an absent metric
  return json(v);
}

double optional_real_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json metrics_to_json(const CheckpointMetrics& m) {
  json j;
  j["epoch"] = m.epoch;
  j["tst_loss"] = m.tst_loss;
  j["off_norm_mean"] = m.off_norm_mean;
  j["off_norm_std"] = m.off_norm_std;
  j["hist_edges"] = vec_to_json(m.off_hist.edges);
  j["hist_counts"] = m.off_hist.counts;
  j["mse_to_optimal"] = optional_real(m.mse_to_optimal);
  j["nearest_mean"] = optional_real(m.nearest_mean);
  j["flagged"] = m.flagged;
  return j;
}

CheckpointMetrics metrics_from_json(const json& j) {
  CheckpointMetrics m;
  m.epoch = j.at("epoch").get<Index>();
  m.tst_loss = j.at("tst_loss").get<double>();
  m.off_norm_mean = j.at("off_norm_mean").get<double>();
  m.off_norm_std = j.at("off_norm_std").get<double>();
  m.off_hist.edges = vec_from_json(j.at("hist_edges"), "hist_edges");
  m.off_hist.counts = j.at("hist_counts").get<std::vector<Index>>();
  m.mse_to_optimal = optional_real_from(j.at("mse_to_optimal"));
  m.nearest_mean = optional_real_from(j.at("nearest_mean"));
  m.flagged = j.at("flagged").get<bool>();
  return m;
}

json emb_to_json(const EmbeddingConfig& cfg) {
  json j;
  j["s"] = cfg.s;
  j["ell"] = cfg.ell;
  j["dim"] = cfg.dim;
  return j;
}

EmbeddingConfig emb_from_json(const json& j) {
  EmbeddingConfig cfg;
  cfg.s = j.at("s").get<double>();
  cfg.ell = j.at("ell").get<double>();
  cfg.dim = j.at("dim").get<Index>();
  validate(cfg);
  return cfg;
}

json field_to_json(const DiagonalField& O) {
  json j;
  j["emb"] = emb_to_json(O.cfg);
  if (O.shared())
    j["shared"] = vec_to_json(O.kappa);
  else
    j["per_entry"] = matrix_rows(O.per_entry);
  return j;
}

DiagonalField field_from_json(const json& j) {
  DiagonalField O;
  O.cfg = emb_from_json(j.at("emb"));
  if (j.contains("shared"))
    O.kappa = vec_from_json(j.at("shared"), "shared");
  else
    O.per_entry = matrix_from_rows(j.at("per_entry"), "per_entry");
  O.validate_shapes();
  return O;
}

// Statistics of the generated endpoints' complement norms.
void off_norm_stats(const SubspaceBasis& basis, const Mat& ends, CheckpointMetrics& m) {
  const Index n = ends.cols();
  std::vector<double> norms(static_cast<std::size_t>(n), 0.0);
  if (basis.Vperp.cols() > 0) {
    Mat Q(basis.Vperp.cols(), n);
    Q.noalias() = basis.Vperp.transpose() * ends;
    for (Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = Q.col(j).norm();
  }
  double sum = 0.0;
  for (double v : norms) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : norms) ss += (v - mean) * (v - mean);
  m.off_norm_mean = mean;
  m.off_norm_std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  m.off_hist = make_histogram(norms);
}

Vec nearest_distances(const DataMatrix& data, const Mat& X) {
  const Vec ysq = data.points.colwise().squaredNorm();
  Mat cross(data.count(), X.cols());
  cross.noalias() = data.points.transpose() * X;
  Vec out(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < data.count(); ++k)
      best = std::min(best, ysq(k) - 2.0 * cross(k, j));
    out(j) = std::sqrt(std::max(0.0, best + X.col(j).squaredNorm()));
  }
  return out;
}

bool is_checkpoint(const std::vector<Index>& cps, Index e) {
  return std::binary_search(cps.begin(), cps.end(), e);
}

McSpec epoch_batch(const TrainConfig& cfg, const RngSpec& batch_root, Index epoch) {
  McSpec mc;
  mc.samples = cfg.batch;
  mc.epsilon = cfg.epsilon;
  mc.rng = substream(batch_root, static_cast<std::uint64_t>(epoch));
  mc.threads = cfg.threads;
  return mc;
}

std::string divergence_note(Index epoch, double loss, double initial) {
  std::ostringstream os;
  os << "training diverged at epoch " << epoch << ": loss " << fmt17(loss)
     << " exceeds 10x the initial " << fmt17(initial);
  return os.str();
}

}  // namespace

void validate(const TrainConfig& cfg) {
  require(cfg.optimizer == "sgd" || cfg.optimizer == "adamw",
          "optimizer must be sgd or adamw, got '" + cfg.optimizer + "'");
  require(cfg.learning_rate > 0.0, "learning rate must be positive");
  require(cfg.epochs >= 0, "epoch count must be nonnegative");
  require(cfg.batch >= 1, "batch size must be positive");
  require(cfg.checkpoint_every >= 0, "checkpoint interval must be nonnegative");
  require(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, "terminal gap must lie in (0, 1)");
  require(cfg.threads >= 1, "thread count must be positive");
  require(cfg.clip_norm > 0.0, "clip norm must be positive");
  require(cfg.metric_samples >= 1, "checkpoint sample count must be positive");
  require(cfg.metric_steps >= 1, "checkpoint flow needs at least one step");
}

std::vector<Index> checkpoint_epochs(const TrainConfig& cfg) {
  std::vector<Index> out{0};
  if (cfg.checkpoint_every > 0)
    for (Index e = cfg.checkpoint_every; e <= cfg.epochs; e += cfg.checkpoint_every)
      out.push_back(e);
  if (out.back() != cfg.epochs) out.push_back(cfg.epochs);
  return out;
}

Histogram make_histogram(const std::vector<double>& vals, Index bins) {
  require(bins >= 1, "histogram needs at least one bin");
  require(!vals.empty(), "histogram needs at least one value");
  double hi = 0.0;
  for (double v : vals) hi = std::max(hi, v);
  if (hi <= 0.0) hi = 1.0;
  Histogram h;
  h.edges = Vec::LinSpaced(bins + 1, 0.0, hi);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : vals) {
    auto idx = static_cast<Index>(v / hi * static_cast<double>(bins));
    idx = std::min(idx, bins - 1);
    h.counts[static_cast<std::size_t>(std::max<Index>(idx, 0))] += 1;
  }
  return h;
}

std::string metrics_csv(const std::vector<CheckpointMetrics>& history) {
  std::ostringstream os;
  os << "epoch,loss,off_norm_mean,off_norm_std,mse\n";
  for (const CheckpointMetrics& m : history)
    os << m.epoch << ',' << fmt17(m.tst_loss) << ',' << fmt17(m.off_norm_mean) << ','
       << fmt17(m.off_norm_std) << ',' << fmt17(m.mse_to_optimal) << '\n';
  return os.str();
}

std::string histogram_json(const CheckpointMetrics& m) {
  json j;
  j["epoch"] = m.epoch;
  j["edges"] = vec_to_json(m.off_hist.edges);
  j["counts"] = m.off_hist.counts;
  j["mean"] = m.off_norm_mean;
  j["std"] = m.off_norm_std;
  return j.dump(2) + "\n";
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  require(cp.mode == "offsubspace" || cp.mode == "subspace",
          "checkpoint mode must be offsubspace or subspace");
  json j;
  j["version"] = cp.version;
  j["mode"] = cp.mode;
  j["epoch"] = cp.epoch;
  if (cp.mode == "offsubspace")
    j["params"] = field_to_json(cp.O);
  else
    j["params"] = parse_json(net_to_json(cp.net), "network parameters");
  if (cp.has_opt) {
    json o;
    o["m"] = vec_to_json(cp.opt.m);
    o["v"] = vec_to_json(cp.opt.v);
    o["step"] = cp.opt.step;
    j["adamw"] = o;
  }
  j["metrics"] = metrics_to_json(cp.metrics);
  write_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const json j = parse_json(read_file(path), path);
  Checkpoint cp;
  require(j.contains("version"), "checkpoint is missing its version field");
  cp.version = j.at("version").get<int>();
  require(cp.version == 1, "unsupported checkpoint version " + std::to_string(cp.version));
  cp.mode = j.at("mode").get<std::string>();
  require(cp.mode == "offsubspace" || cp.mode == "subspace",
          "checkpoint mode must be offsubspace or subspace");
  cp.epoch = j.at("epoch").get<Index>();
  if (cp.mode == "offsubspace")
    cp.O = field_from_json(j.at("params"));
  else
    cp.net = net_from_json(j.at("params").dump());
  if (j.contains("adamw")) {
    cp.has_opt = true;
    cp.opt.m = vec_from_json(j.at("adamw").at("m"), "adamw.m");
    cp.opt.v = vec_from_json(j.at("adamw").at("v"), "adamw.v");
    cp.opt.step = j.at("adamw").at("step").get<std::int64_t>();
  }
  cp.metrics = metrics_from_json(j.at("metrics"));
  return cp;
}

OffsubspaceResult train_offsubspace(const DataMatrix& data, const SubspaceBasis& basis,
                                    const EmbeddingConfig& emb, const TrainConfig& cfg,
                                    const DiagonalField* init, const Checkpoint* resume) {
  validate(cfg);
  require(basis.V.rows() == data.dim(), "basis and dataset dimensions differ");
  const Index off_dim = basis.Vperp.cols();
  require(off_dim >= 1, "off-subspace training needs a nontrivial complement");

  OffsubspaceResult res;
  if (resume) {
    require(resume->mode == "offsubspace", "checkpoint was written by the other regime");
    require(resume->epoch <= cfg.epochs, "checkpoint is past the requested epoch count");
    res.O = resume->O;
  } else if (init) {
    res.O = *init;
  } else {
    res.O.cfg = emb;
    res.O.per_entry = Mat::Zero(off_dim, emb.dim);
  }
  res.O.validate_shapes();
  const bool shared = res.O.shared();
  const Index np = shared ? res.O.cfg.dim : static_cast<Index>(res.O.per_entry.size());

  const bool use_adamw = cfg.optimizer == "adamw";
  AdamWConfig acfg = cfg.adamw;
  acfg.lr = cfg.learning_rate;
  AdamWState opt = make_adamw_state(np);
  if (resume && resume->has_opt) opt = resume->opt;

  const RngSpec batch_root = substream(cfg.rng, 1);
  const Mat X0 = sample_standard_gaussian(substream(cfg.rng, 2), data.dim(), cfg.metric_samples);
  const TimeGrid grid = make_grid("uniform", cfg.metric_steps, cfg.epsilon);
  const std::vector<Index> cps = checkpoint_epochs(cfg);

  const auto record = [&](Index epoch, double loss, bool flagged) {
    OsdVelocityField field(basis, data, res.O, std::nullopt);
    const Mat ends = ode_endpoints_synced(field, X0, grid, OdeMethod::Euler);
    CheckpointMetrics m;
    m.epoch = epoch;
    m.tst_loss = loss;
    m.flagged = flagged;
    off_norm_stats(basis, ends, m);
    res.history.push_back(m);
  };

  double initial_loss = std::numeric_limits<double>::quiet_NaN();
  const Index start = resume ? resume->epoch : 0;
  if (resume) {
    initial_loss = resume->metrics.tst_loss;
  } else {
    const McSpec mc0 = epoch_batch(cfg, batch_root, 0);
    initial_loss = loss_O_mc(res.O, basis, data, mc0).value;
    if (is_checkpoint(cps, 0)) record(0, initial_loss, false);
  }

  bool flagged = false;
  for (Index e = start + 1; e <= cfg.epochs; ++e) {
    const McSpec mc = epoch_batch(cfg, batch_root, e);
    OGrad g = loss_O_grad(res.O, basis, data, mc);
    const double loss = g.loss.value;
    if (!std::isfinite(loss) || loss > 10.0 * std::max(initial_loss, 1e-12)) {
      res.diverged = true;
      res.note = divergence_note(e, loss, initial_loss);
      record(e, loss, flagged);
      res.opt = opt;
      res.has_opt = use_adamw;
      return res;
    }
    Vec grad = shared ? g.shared_grad
                      : Vec(Eigen::Map<const Vec>(g.per_entry_grad.data(), np));
    clip_global_norm(grad, cfg.clip_norm);
    Vec params =
        shared ? res.O.kappa : Vec(Eigen::Map<const Vec>(res.O.per_entry.data(), np));
    const bool ok =
        use_adamw ? adamw_step(params, grad, opt, acfg) : sgd_step(params, grad, cfg.learning_rate);
    if (ok) {
      if (shared)
        res.O.kappa = params;
      else
        Eigen::Map<Vec>(res.O.per_entry.data(), np) = params;
    } else {
      flagged = true;
    }
    if (is_checkpoint(cps, e)) {
      record(e, loss, flagged);
      flagged = false;
    }
  }
  res.opt = opt;
  res.has_opt = use_adamw;
  return res;
}

SubspaceResult train_subspace(const DataMatrix& data, const SubspaceBasis& basis,
                              const NetConfig& ncfg, const TrainConfig& cfg,
                              const SubspaceNet* init, const Checkpoint* resume) {
  validate(cfg);
  require(basis.V.rows() == data.dim(), "basis and dataset dimensions differ");
  require(ncfg.sub_dim == basis.R.rows(), "network width and subspace rank differ");

  SubspaceResult res;
  if (resume) {
    require(resume->mode == "subspace", "checkpoint was written by the other regime");
    require(resume->epoch <= cfg.epochs, "checkpoint is past the requested epoch count");
    res.net = resume->net;
  } else if (init) {
    res.net = *init;
  } else {
    res.net = make_net(ncfg, substream(cfg.rng, 0));
  }
  const Index np = param_count(res.net);

  const bool use_adamw = cfg.optimizer == "adamw";
  AdamWConfig acfg = cfg.adamw;
  acfg.lr = cfg.learning_rate;
  AdamWState opt = make_adamw_state(np);
  if (resume && resume->has_opt) opt = resume->opt;

  const RngSpec batch_root = substream(cfg.rng, 1);
  const Mat X0 = sample_standard_gaussian(substream(cfg.rng, 2), data.dim(), cfg.metric_samples);
  const TimeGrid grid = make_grid("uniform", cfg.metric_steps, cfg.epsilon);
  const std::vector<Index> cps = checkpoint_epochs(cfg);

  // The exact field's endpoints are parameter-free, so one flow serves every
  // checkpoint ("identical noise seeds" = the shared frozen starts).
  const OsdVelocityField exact_field(basis, data, std::nullopt, std::nullopt);
  const Mat ends_opt = ode_endpoints_synced(exact_field, X0, grid, OdeMethod::Euler);

  const auto record = [&](Index epoch, double loss, bool flagged) {
    OsdVelocityField field(basis, data, std::nullopt, res.net);
    const Mat ends = ode_endpoints_synced(field, X0, grid, OdeMethod::Euler);
    CheckpointMetrics m;
    m.epoch = epoch;
    m.tst_loss = loss;
    m.flagged = flagged;
    off_norm_stats(basis, ends, m);
    m.mse_to_optimal = (ends - ends_opt).colwise().squaredNorm().mean();
    m.nearest_mean = nearest_distances(data, ends).mean();
    res.history.push_back(m);
  };

  double initial_loss = std::numeric_limits<double>::quiet_NaN();
  const Index start = resume ? resume->epoch : 0;
  if (resume) {
    initial_loss = resume->metrics.tst_loss;
  } else {
    const McSpec mc0 = epoch_batch(cfg, batch_root, 0);
    initial_loss = tst_loss_s(res.net, basis, data, mc0).value;
    if (is_checkpoint(cps, 0)) record(0, initial_loss, false);
  }

  bool flagged = false;
  for (Index e = start + 1; e <= cfg.epochs; ++e) {
    const McSpec mc = epoch_batch(cfg, batch_root, e);
    ValueGrad g = tst_loss_grad(res.net, basis, data, mc);
    const double loss = g.loss.value;
    if (!std::isfinite(loss) || loss > 10.0 * std::max(initial_loss, 1e-12)) {
      res.diverged = true;
      res.note = divergence_note(e, loss, initial_loss);
      record(e, loss, flagged);
      res.opt = opt;
      res.has_opt = use_adamw;
      return res;
    }
    clip_global_norm(g.grad, cfg.clip_norm);
    Vec params = flatten(res.net);
    const bool ok = use_adamw ? adamw_step(params, g.grad, opt, acfg)
                              : sgd_step(params, g.grad, cfg.learning_rate);
    if (ok)
      unflatten(params, res.net);
    else
      flagged = true;
    if (is_checkpoint(cps, e)) {
      record(e, loss, flagged);
      flagged = false;
    }
  }
  res.opt = opt;
  res.has_opt = use_adamw;
  return res;
}

}  // namespace flowlab
