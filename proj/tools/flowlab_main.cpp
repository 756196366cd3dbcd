// SPDX-License-Identifier: Apache-2.0
//
// flowlab command-line runner.  Every command reads an optional sectioned
// config, writes its CSV/JSON outputs plus a run manifest into --out (the
// FLOWLAB_OUT environment variable overrides the flag), and exits 0 on
// success, 1 on an invariant failure, 2 on a configuration error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flowlab/config.hpp"
#include "flowlab/convex.hpp"
#include "flowlab/data.hpp"
#include "flowlab/grid.hpp"
#include "flowlab/hierarchy.hpp"
#include "flowlab/integrate.hpp"
#include "flowlab/io.hpp"
#include "flowlab/losses.hpp"
#include "flowlab/manifest.hpp"
#include "flowlab/osdnet.hpp"
#include "flowlab/parallel.hpp"
#include "flowlab/quadratic.hpp"
#include "flowlab/svg.hpp"
#include "flowlab/train.hpp"
#include "flowlab/velocity.hpp"
#include "flowlab/verify.hpp"

namespace fs = std::filesystem;
using namespace flowlab;

namespace {

// Files go through this writer so the run manifest can list every output.
struct OutputWriter {
  fs::path dir;
  std::vector<std::string> names;

  std::string path_of(const std::string& name) const { return (dir / name).string(); }

  void write(const std::string& name, const std::string& text) {
    write_file(path_of(name), text);
    names.push_back(name);
  }

  // Registers a file already written by a library save function.
  void external(const std::string& name) { names.push_back(name); }
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  bool svg = false;
  std::uint64_t seed = 1;
  int threads = 1;
};

const std::map<std::string, std::set<std::string>> kSchema = {
    {"run", {"seed", "threads"}},
    {"dataset",
     {"mode", "count", "box", "min_separation", "dim", "per_cluster", "std_dev", "path",
      "format"}},
    {"paths",
     {"schedule", "beta0", "steps", "epsilon", "grid", "method", "trajectories",
      "save_trajectories"}},
    {"bound", {"t_list", "tau_list", "samples", "separation"}},
    {"emb", {"s_list", "dim_list", "ell", "points", "panels", "cutoff"}},
    {"train",
     {"mode", "d", "sub_dim", "count", "optimizer", "learning_rate", "epochs", "batch",
      "checkpoint_every", "epsilon", "clip_norm", "metric_samples", "metric_steps", "hidden",
      "blocks", "emb_s", "emb_ell", "emb_dim"}},
    {"verify", {"perturb_optimal"}},
};

std::string num_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

DataMatrix make_dataset(const ConfigFile& cfg, std::uint64_t seed) {
  const std::string mode = cfg.get_string("dataset", "mode", "sparse");
  if (mode == "sparse") {
    return sparse_square_dataset(cfg.get_int("dataset", "count", 6),
                                 cfg.get_real("dataset", "box", 10.0),
                                 cfg.get_real("dataset", "min_separation", 5.0),
                                 cfg.get_int("dataset", "dim", 2), RngSpec{seed, 11});
  }
  if (mode == "hierarchical") {
    Mat centers(2, 4);
    centers << 2.0, 2.0, -2.0, -2.0,  //
        2.0, -2.0, 2.0, -2.0;
    return cluster_dataset(centers, cfg.get_int("dataset", "per_cluster", 30),
                           cfg.get_real("dataset", "std_dev", 0.5), RngSpec{seed, 12});
  }
  if (mode == "file") {
    require(cfg.has("dataset", "path"), "dataset: file mode needs a 'path' key");
    const std::string path = cfg.get_string("dataset", "path", "");
    std::string format = cfg.get_string("dataset", "format", "");
    if (format.empty())
      format = path.size() >= 5 && path.substr(path.size() - 5) == ".json" ? "json" : "csv";
    return load_dataset(path, format);
  }
  throw config_error("dataset: unknown mode '" + mode + "' (sparse | hierarchical | file)");
}

PathSchedule make_schedule(const ConfigFile& cfg) {
  const std::string name = cfg.get_string("paths", "schedule", "straight");
  if (name == "straight") return PathSchedule::ot();
  if (name == "vp") return PathSchedule::vp(cfg.get_real("paths", "beta0", 1.0));
  throw config_error("paths: unknown schedule '" + name + "' (straight | vp)");
}

const char* kPalette[6] = {"#4878cf", "#6acc65", "#d65f5f", "#b47cc7", "#c4ad66", "#77bedb"};

int cmd_gen_paths(const ConfigFile& cfg, const CommonArgs& args, Index steps_override,
                  OutputWriter& w) {
  const DataMatrix data = make_dataset(cfg, args.seed);
  const PathSchedule sched = make_schedule(cfg);
  const Index steps =
      steps_override > 0 ? steps_override : cfg.get_int("paths", "steps", 100);
  const TimeGrid grid = make_grid(cfg.get_string("paths", "grid", "uniform"), steps,
                                  cfg.get_real("paths", "epsilon", 1e-3));
  const OdeMethod method = parse_method(cfg.get_string("paths", "method", "euler"));
  const Index n_traj = cfg.get_int("paths", "trajectories", 100);
  const Index save_n = std::min<Index>(n_traj, cfg.get_int("paths", "save_trajectories", 20));
  require(n_traj >= 1, "paths: trajectories must be at least 1");

  const Mat X0 = sample_standard_gaussian(RngSpec{args.seed, 21}, data.dim(), n_traj);
  const OptimalVelocityField field(sched, data);
  std::vector<GenerateResult> runs(static_cast<size_t>(n_traj));
  parallel_for(n_traj, args.threads, [&](std::int64_t j) {
    runs[static_cast<size_t>(j)] =
        generate(field, X0.col(static_cast<Index>(j)), grid, data, method);
  });

  for (Index j = 0; j < save_n; ++j) {
    const std::string name = "traj_" + std::to_string(j) + ".csv";
    save_trajectory(runs[static_cast<size_t>(j)].traj, w.path_of(name));
    w.external(name);
  }

  std::ostringstream ep;
  ep << "traj,nearest,distance,tie";
  for (Index r = 0; r < data.dim(); ++r) ep << ",e" << r;
  ep << "\n";
  for (Index j = 0; j < n_traj; ++j) {
    const GenerateResult& g = runs[static_cast<size_t>(j)];
    ep << j << ',' << g.nearest << ',' << fmt17(g.distance) << ',' << (g.tie ? 1 : 0);
    for (Index r = 0; r < data.dim(); ++r) ep << ',' << fmt17(g.endpoint(r));
    ep << "\n";
  }
  w.write("endpoints.csv", ep.str());

  if (cfg.get_string("dataset", "mode", "sparse") == "hierarchical") {
    for (double target : {0.0, 0.25, 0.5, 0.75}) {
      Index k = 0;
      for (Index i = 1; i < grid.nodes.size(); ++i)
        if (std::abs(grid.nodes(i) - target) < std::abs(grid.nodes(k) - target)) k = i;
      std::ostringstream ss;
      for (Index r = 0; r < data.dim(); ++r) ss << (r ? "," : "") << 'x' << r;
      ss << "\n";
      for (Index j = 0; j < n_traj; ++j) {
        const Vec state = runs[static_cast<size_t>(j)].traj.states.col(k);
        for (Index r = 0; r < data.dim(); ++r) ss << (r ? "," : "") << fmt17(state(r));
        ss << "\n";
      }
      w.write("snapshot_t" + num_tag(target) + ".csv", ss.str());
    }
  }

  if (args.svg && data.dim() == 2) {
    SvgPlot plot(640, 640, "generation paths");
    for (Index j = 0; j < n_traj; ++j) {
      const Mat& st = runs[static_cast<size_t>(j)].traj.states;
      plot.line(st.row(0).transpose(), st.row(1).transpose(), kPalette[j % 6], 1.0);
    }
    plot.scatter(data.points.row(0).transpose(), data.points.row(1).transpose(), "#222222",
                 4.0);
    save_svg(plot, w.path_of("paths.svg"));
    w.external("paths.svg");
  }
  return 0;
}

int cmd_bound_check(const ConfigFile& cfg, const CommonArgs& args, OutputWriter& w) {
  const DataMatrix data = make_dataset(cfg, args.seed);
  const std::vector<double> ts = cfg.get_reals("bound", "t_list", {0.5, 0.7, 0.9, 0.99});
  const std::vector<double> taus = cfg.get_reals("bound", "tau_list", {0.9, 0.99});
  const Index samples = cfg.get_int("bound", "samples", 100000);
  const bool degenerate = data.count() < 2;
  const double M = cfg.has("bound", "separation") ? cfg.get_real("bound", "separation", 0.0)
                   : degenerate                   ? 0.0
                                                  : min_separation(data);

  std::ostringstream os;
  os << "t,tau,bound,p_hat,stderr\n";
  bool violated = false;
  std::uint64_t cell = 0;
  std::vector<double> bcurve, pcurve, tcurve;
  for (double tau : taus)
    for (double t : ts) {
      const NonconcentrationEstimate est =
          estimate_nonconcentration(t, tau, data, samples, RngSpec{args.seed, 31 + cell++},
                                    args.threads);
      // One point never splits its posterior mass, so the non-concentration
      // probability is identically zero and the bound row degenerates with it.
      const double bound =
          degenerate ? 0.0 : concentration_bound(t, tau, M, data.count());
      if (est.p_hat - 3.0 * est.std_err > bound) violated = true;
      os << fmt17(t) << ',' << fmt17(tau) << ',' << fmt17(bound) << ',' << fmt17(est.p_hat)
         << ',' << fmt17(est.std_err) << "\n";
      tcurve.push_back(t);
      bcurve.push_back(bound);
      pcurve.push_back(est.p_hat);
    }
  w.write("bound.csv", os.str());

  if (args.svg) {
    SvgPlot plot(640, 480, "bound vs sampled non-concentration");
    const Index nt = static_cast<Index>(ts.size());
    for (size_t i = 0; i < taus.size(); ++i) {
      const auto off = static_cast<std::ptrdiff_t>(i * ts.size());
      Vec tx(nt), by(nt), py(nt);
      for (Index k = 0; k < nt; ++k) {
        tx(k) = tcurve[static_cast<size_t>(off + k)];
        by(k) = bcurve[static_cast<size_t>(off + k)];
        py(k) = pcurve[static_cast<size_t>(off + k)];
      }
      plot.line(tx, by, kPalette[(2 * i) % 6]);
      plot.scatter(tx, py, kPalette[(2 * i + 1) % 6]);
    }
    save_svg(plot, w.path_of("bound.svg"));
    w.external("bound.svg");
  }
  if (violated)
    std::cerr << "bound-check: sampled estimate exceeded the bound by more than three "
                 "standard errors\n";
  return violated ? 1 : 0;
}

int cmd_emb_approx(const ConfigFile& cfg, const CommonArgs& args, OutputWriter& w) {
  const std::vector<double> s_list = cfg.get_reals("emb", "s_list", {1.0, 1000.0});
  const std::vector<double> dim_list =
      cfg.get_reals("emb", "dim_list", {32.0, 64.0, 128.0, 256.0});
  const double ell = cfg.get_real("emb", "ell", 10000.0);
  const Index points = cfg.get_int("emb", "points", 1000);
  const Index panels = cfg.get_int("emb", "panels", 2048);
  const double cutoff = cfg.get_real("emb", "cutoff", 1e-4);
  require(points >= 2, "emb: points must be at least 2");

  std::ostringstream summary;
  summary << "s,dim,weighted_error,zoom_sign_changes\n";
  for (double s : s_list)
    for (double dim_real : dim_list) {
      const auto dim = static_cast<Index>(dim_real);
      const EmbeddingConfig ec{s, ell, dim};
      const QuadraticData q = compute_quadratic_data(ec, panels);
      const TruncatedLimit tl = kappa_limit_truncated(q, cutoff);
      const auto approx_signed = [&](double t) { return tl.kappa.dot(emb(t, ec)); };

      const std::string tag = "_s" + num_tag(s) + "_dim" + num_tag(dim_real);
      const auto write_curve = [&](const std::string& name, double t_max) {
        std::ostringstream os;
        os << "t,approx,target\n";
        for (Index i = 0; i < points; ++i) {
          const double t =
              t_max * static_cast<double>(i) / static_cast<double>(points - 1);
          os << fmt17(t) << ',' << fmt17(std::abs(approx_signed(t))) << ','
             << fmt17(1.0 / (1.0 - t)) << "\n";
        }
        w.write(name, os.str());
      };
      write_curve("emb" + tag + ".csv", 0.999);
      write_curve("emb_zoom" + tag + ".csv", 0.1);

      // Squared residual of the product form (1-t) o(t) + 1, the weight under
      // which the coefficients were fitted, restricted to [0, 0.9].
      const double werr = integrate_gl8(
          [&](double t) {
            const double r = (1.0 - t) * approx_signed(t) + 1.0;
            return r * r;
          },
          0.0, 0.9, 256);
      Index flips = 0;
      double prev = approx_signed(0.0) + 1.0;
      for (Index i = 1; i < points; ++i) {
        const double t = 0.1 * static_cast<double>(i) / static_cast<double>(points - 1);
        const double cur = approx_signed(t) + 1.0 / (1.0 - t);
        if (prev * cur < 0.0) ++flips;
        prev = cur;
      }
      summary << num_tag(s) << ',' << num_tag(dim_real) << ',' << fmt17(werr) << ',' << flips
              << "\n";

      if (args.svg) {
        Vec tx(points), ay(points), gy(points);
        for (Index i = 0; i < points; ++i) {
          const double t = 0.999 * static_cast<double>(i) / static_cast<double>(points - 1);
          tx(i) = t;
          ay(i) = std::abs(approx_signed(t));
          gy(i) = 1.0 / (1.0 - t);
        }
        SvgPlot plot(640, 480, "|k . emb(t)| vs 1/(1-t)" + tag);
        plot.line(tx, gy, "#222222");
        plot.line(tx, ay, "#4878cf");
        save_svg(plot, w.path_of("emb" + tag + ".svg"));
        w.external("emb" + tag + ".svg");
      }
    }
  w.write("emb_summary.csv", summary.str());
  return 0;
}

int cmd_train(const ConfigFile& cfg, const CommonArgs& args, Index epochs_override,
              OutputWriter& w) {
  const std::string mode = cfg.get_string("train", "mode", "offsubspace");
  const bool subspace = mode == "subspace";
  require(subspace || mode == "offsubspace",
          "train: unknown mode '" + mode + "' (offsubspace | subspace)");

  const Index d = cfg.get_int("train", "d", subspace ? 20 : 100);
  const Index sub_dim = cfg.get_int("train", "sub_dim", 20);
  const Index count = cfg.get_int("train", "count", 200);
  const DataMatrix data = cube_subspace_dataset(d, sub_dim, count, RngSpec{args.seed, 41});
  const SubspaceBasis basis = svd_decompose(data);

  TrainConfig tc;
  tc.optimizer = cfg.get_string("train", "optimizer", subspace ? "adamw" : "sgd");
  tc.learning_rate = cfg.get_real("train", "learning_rate", subspace ? 1e-4 : 0.1);
  tc.epochs = epochs_override >= 0 ? epochs_override
                                   : cfg.get_int("train", "epochs", subspace ? 20000 : 80000);
  tc.batch = cfg.get_int("train", "batch", 1024);
  tc.checkpoint_every =
      cfg.get_int("train", "checkpoint_every", subspace ? 1000 : 20000);
  tc.epsilon = cfg.get_real("train", "epsilon", 1e-3);
  tc.rng = RngSpec{args.seed, 42};
  tc.threads = args.threads;
  tc.clip_norm = cfg.get_real("train", "clip_norm", 10.0);
  tc.metric_samples = cfg.get_int("train", "metric_samples", 10000);
  tc.metric_steps = cfg.get_int("train", "metric_steps", subspace ? 100 : 1000);

  const EmbeddingConfig ec{cfg.get_real("train", "emb_s", 1000.0),
                           cfg.get_real("train", "emb_ell", 10000.0),
                           cfg.get_int("train", "emb_dim", 256)};

  std::vector<CheckpointMetrics> history;
  Checkpoint ckpt;
  ckpt.mode = mode;
  bool diverged = false;
  std::string note;
  if (subspace) {
    NetConfig nc;
    nc.sub_dim = basis.D;
    nc.emb = ec;
    nc.hidden = cfg.get_int("train", "hidden", 256);
    nc.blocks = cfg.get_int("train", "blocks", 2);
    SubspaceResult res = train_subspace(data, basis, nc, tc);
    history = res.history;
    ckpt.net = std::move(res.net);
    ckpt.opt = std::move(res.opt);
    ckpt.has_opt = res.has_opt;
    diverged = res.diverged;
    note = res.note;
  } else {
    OffsubspaceResult res = train_offsubspace(data, basis, ec, tc);
    history = res.history;
    ckpt.O = std::move(res.O);
    ckpt.opt = std::move(res.opt);
    ckpt.has_opt = res.has_opt;
    diverged = res.diverged;
    note = res.note;
  }

  w.write("metrics.csv", metrics_csv(history));
  if (!subspace)
    for (const CheckpointMetrics& m : history)
      if (m.epoch > 0)
        w.write("hist_" + std::to_string(m.epoch) + ".json", histogram_json(m));
  ckpt.epoch = history.back().epoch;
  ckpt.metrics = history.back();
  save_checkpoint(w.path_of("checkpoint.json"), ckpt);
  w.external("checkpoint.json");

  if (args.svg && history.size() >= 2) {
    const auto nh = static_cast<Index>(history.size());
    Vec ex(nh), loss(nh), aux(nh);
    for (Index i = 0; i < nh; ++i) {
      ex(i) = static_cast<double>(history[static_cast<size_t>(i)].epoch);
      loss(i) = history[static_cast<size_t>(i)].tst_loss;
      aux(i) = subspace ? history[static_cast<size_t>(i)].mse_to_optimal
                        : history[static_cast<size_t>(i)].off_norm_mean;
    }
    SvgPlot plot(640, 480, subspace ? "loss and endpoint mse" : "loss and complement norm");
    plot.line(ex, loss, "#4878cf");
    plot.line(ex, aux, "#d65f5f");
    save_svg(plot, w.path_of("train.svg"));
    w.external("train.svg");
  }

  if (diverged) {
    std::cerr << "train: " << note << "\n";
    return 1;
  }
  return 0;
}

int cmd_verify(const ConfigFile& cfg, const CommonArgs& args, double perturb, bool json_out,
               OutputWriter& w) {
  VerifyOptions vo;
  vo.seed = args.seed;
  vo.perturb_optimal =
      perturb != 0.0 ? perturb : cfg.get_real("verify", "perturb_optimal", 0.0);
  vo.threads = args.threads;
  const std::vector<CheckResult> results = run_verification(vo);
  w.write("report.json", verify_report_json(results));
  std::cout << (json_out ? verify_report_json(results) : verify_report_text(results));
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowlab: exact velocity fields, generation dynamics, and decomposition "
               "training for discrete-target flows"};
  app.require_subcommand(1);

  CommonArgs args;
  Index steps_override = 0;
  Index epochs_override = -1;
  double perturb = 0.0;
  bool json_out = false;

  std::vector<CLI::Option*> seed_opts, thread_opts;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "sectioned key=value config file");
    sub->add_option("--out", args.out_dir, "output directory (default 'out')");
    sub->add_flag("--svg", args.svg, "also emit SVG plots (never changes CSV bytes)");
    seed_opts.push_back(sub->add_option("--seed", args.seed, "root RNG seed (default 1)"));
    thread_opts.push_back(
        sub->add_option("--threads", args.threads, "worker count (default 1)"));
  };

  CLI::App* gen = app.add_subcommand("gen-paths", "integrate generation trajectories");
  add_common(gen);
  gen->add_option("--steps", steps_override, "override the integration step count");

  CLI::App* bound = app.add_subcommand(
      "bound-check", "compare sampled non-concentration with the closed-form bound");
  add_common(bound);

  CLI::App* embc = app.add_subcommand(
      "emb-approx", "fitted-coefficient approximations of the terminal dynamics");
  add_common(embc);

  CLI::App* train = app.add_subcommand("train", "train the decomposed field");
  add_common(train);
  train->add_option("--epochs", epochs_override, "override the epoch count");

  CLI::App* verify = app.add_subcommand("verify", "run the full invariant suite");
  add_common(verify);
  verify->add_option("--perturb-optimal", perturb,
                     "inject this offset into the exact parameters (negative control)");
  verify->add_flag("--json", json_out, "print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ConfigFile cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    require_known(cfg, kSchema);

    bool seed_given = false, threads_given = false;
    for (const CLI::Option* o : seed_opts) seed_given = seed_given || o->count() > 0;
    for (const CLI::Option* o : thread_opts) threads_given = threads_given || o->count() > 0;
    if (!seed_given)
      args.seed = static_cast<std::uint64_t>(
          cfg.get_int("run", "seed", static_cast<Index>(args.seed)));
    if (!threads_given)
      args.threads = static_cast<int>(cfg.get_int("run", "threads", args.threads));
    require(args.threads >= 1, "run: threads must be at least 1");

    if (const char* env = std::getenv("FLOWLAB_OUT"))
      if (*env) args.out_dir = env;
    fs::create_directories(args.out_dir);
    OutputWriter w;
    w.dir = args.out_dir;

    int code = 0;
    std::string name;
    if (gen->parsed()) {
      name = "gen-paths";
      code = cmd_gen_paths(cfg, args, gen->count("--steps") ? steps_override : 0, w);
    } else if (bound->parsed()) {
      name = "bound-check";
      code = cmd_bound_check(cfg, args, w);
    } else if (embc->parsed()) {
      name = "emb-approx";
      code = cmd_emb_approx(cfg, args, w);
    } else if (train->parsed()) {
      name = "train";
      code = cmd_train(cfg, args, train->count("--epochs") ? epochs_override : -1, w);
    } else {
      name = "verify";
      code = cmd_verify(cfg, args, perturb, json_out, w);
    }

    RunManifest man;
    man.command = name;
    man.config_digest = fnv1a_hex(canonical_text(cfg));
    man.rng = RngSpec{args.seed, 0};
    man.outputs = w.names;
    save_manifest(man, w.path_of("manifest.json"));
    return code;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invariant_error& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
