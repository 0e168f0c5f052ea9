#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gssl/backbone/checkpoint.hpp"
#include "gssl/graph/embedding.hpp"
#include "gssl/metrics/ablation.hpp"
#include "gssl/metrics/evaluation.hpp"
#include "gssl/metrics/hoeffding.hpp"
#include "gssl/trainer/config.hpp"
#include "gssl/trainer/pseudo_label.hpp"
#include "gssl/trainer/setup.hpp"

namespace gssl::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

inline constexpr const char* kSchemas = R"(Output files (all under --out):
  config.json        resolved configuration, also echoed to stdout
  train:     metrics.csv      step,epoch,lr,train_loss,pl_accuracy,test_error
             summary.txt, split.txt (index,label), model.lpck
  propagate: pseudo_labels.csv  index,label,max_score
  augment-demo: sample_<i>_{original,labelled,unlabelled}.ppm,
             augment_demo.csv sample,pipeline,flipped,cutout_fraction,transforms
  invariance: invariance.csv  dataset,augmentation,trials,clean_accuracy,augmented_accuracy,v_z
             variance.csv     n_a,variance,standard_error,mean_loss (with --na-grid)
  hoeffding: hoeffding.csv    sampler,n_a,eps,width,bound,empirical_tail,standard_error,within_bound
  ablation:  ablation.csv     epoch,network_pl_accuracy,graph_pl_accuracy,network_test_error,graph_test_error
Empty CSV cells mean "not measured". Labels are 0-based.
Exit codes: 0 success, 1 configuration error, 2 runtime or numerical error.)";

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

// Options shared by every command that runs on a RunConfig.
struct ConfigArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON config file (defaults apply when omitted)");
    cmd->add_option("--set", sets, "override as dotted.key=value, repeatable")->take_all();
    cmd->add_option("--seed", seed, "run seed");
    cmd->add_option("--threads", threads, "worker threads");
  }

  // File, then --set overrides, then explicit flags.
  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    cfg = apply_overrides(cfg, sets);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();
    return cfg;
  }
};

inline void snapshot(const std::filesystem::path& dir, const Json& j, std::ostream& out) {
  std::filesystem::create_directories(dir);
  auto f = open_output(dir / "config.json");
  f << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
}

inline bool is_count(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

// "--labels 40" sets n_labelled; anything else names a split file.
inline void apply_labels_arg(const std::string& labels, RunConfig& cfg, DataSources& src) {
  if (labels.empty()) return;
  if (is_count(labels)) {
    cfg.n_labelled = std::stoull(labels);
  } else {
    src.split_file = labels;
  }
}

inline TransformSpec parse_transform(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const auto kind = parse_transform_kind(name);
  if (!kind) throw InvalidConfig("unknown transform '" + name + "'");
  TransformSpec spec{*kind, 0.0};
  if (colon != std::string::npos) {
    try {
      spec.magnitude = std::stod(text.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw InvalidConfig("bad magnitude in '" + text + "'");
    }
  }
  spec.validate();
  return spec;
}

inline std::string describe(const PipelineTrace& t) {
  std::string s;
  for (const auto& spec : t.applied) {
    if (!s.empty()) s += ' ';
    s += std::string(to_string(spec.kind)) + ':' + num(spec.magnitude);
  }
  return s;
}

}  // namespace detail

struct TrainArgs {
  detail::ConfigArgs cfg;
  std::string data, test_data, labels, out = "out";
};

inline int run_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = a.cfg.resolve();
  DataSources src;
  if (!a.data.empty()) cfg.dataset = a.data;
  src.test = a.test_data;
  detail::apply_labels_arg(a.labels, cfg, src);
  cfg.validate();
  const std::filesystem::path dir = a.out;
  detail::snapshot(dir, to_json(cfg), out);

  TrainData data = prepare_data(cfg, src);
  write_split_file((dir / "split.txt").string(), data.seed);
  Trainer trainer(cfg, std::move(data));
  trainer.set_dump_path((dir / "diverged.lpck").string());
  auto metrics = detail::open_output(dir / "metrics.csv");
  write_metrics_header(metrics);
  const auto result = trainer.train([&](const EpochMetrics& m) {
    write_metrics_row(metrics, m);
    metrics.flush();
  });
  write_checkpoint((dir / "model.lpck").string(), trainer.model(), trainer.optimizer_state());

  auto summary = detail::open_output(dir / "summary.txt");
  summary << "steps " << trainer.optimizer_state().step << "\nepochs " << result.metrics.size() << "\ninit_test_error "
          << detail::num(result.init_test_error) << "\nfinal_test_error " << detail::num(result.final_test_error)
          << "\npseudo_label_rounds " << result.counters.pseudo_label_rounds << '\n';
  out << "final test error " << detail::num(result.final_test_error) << " (after supervised init "
      << detail::num(result.init_test_error) << ")\n";
  return kOk;
}

struct PropagateArgs {
  detail::ConfigArgs cfg;
  std::string embeddings, labels, out = "out";
  std::optional<std::size_t> k, classes;
  std::optional<double> mu;
};

inline int run_propagate(const PropagateArgs& a, std::ostream& out) {
  RunConfig cfg = a.cfg.resolve();
  if (a.k) cfg.k = *a.k;
  if (a.mu) cfg.mu = *a.mu;
  cfg.validate();
  const std::filesystem::path dir = a.out;
  Json snap = to_json(cfg);
  snap["embeddings"] = a.embeddings;
  snap["labels"] = a.labels;
  detail::snapshot(dir, snap, out);

  const EmbeddingMatrix v = read_embeddings(a.embeddings);
  const auto entries = read_split_file(a.labels);
  std::size_t classes = a.classes.value_or(0);
  if (!a.classes) {
    for (const auto& e : entries) {
      if (!e.label) throw InputError(a.labels + ": every entry needs a label for propagate");
      classes = std::max(classes, static_cast<std::size_t>(std::max(*e.label, 0)) + 1);
    }
  }
  const LabelSeed seed = seed_from_entries(v.size(), classes, entries);
  const auto outcome = graph_pseudo_labels(v.data(), seed, cfg);

  auto csv = detail::open_output(dir / "pseudo_labels.csv");
  csv << "index,label,max_score\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    csv << i << ',' << outcome.labels[i] << ',' << detail::num(outcome.scores.row(static_cast<Eigen::Index>(i)).maxCoeff())
        << '\n';
  out << "labelled " << seed.labelled.size() << " of " << v.size() << " samples, " << classes << " classes";
  if (!outcome.converged) out << " (conjugate gradient hit its iteration cap)";
  out << '\n';
  return kOk;
}

struct AugmentDemoArgs {
  std::string data = "moon_images", out = "out";
  std::size_t count = 4;
  std::uint64_t seed = 0;
};

inline int run_augment_demo(const AugmentDemoArgs& a, std::ostream& out) {
  if (a.count == 0) throw InvalidConfig("--count must be positive");
  const std::filesystem::path dir = a.out;
  detail::snapshot(dir, Json{{"command", "augment-demo"}, {"data", a.data}, {"count", a.count}, {"seed", a.seed}}, out);
  const std::size_t n = a.count + a.count % 2;
  const Dataset ds = load_dataset(a.data, n, 0.1, a.seed);
  if (!ds.image) throw InputError("augment-demo needs an image dataset, got '" + a.data + "'");
  const AugmentPolicy policy;  // no normalization so the files stay viewable
  auto csv = detail::open_output(dir / "augment_demo.csv");
  csv << "sample,pipeline,flipped,cutout_fraction,transforms\n";
  for (std::size_t i = 0; i < std::min(a.count, ds.size()); ++i) {
    const auto img = ds.image_at(i);
    const std::string stem = "sample_" + std::to_string(i) + "_";
    write_ppm((dir / (stem + "original.ppm")).string(), img);
    for (const bool unlabelled : {false, true}) {
      Rng rng = make_rng({a.seed, i, unlabelled ? 2u : 1u});
      PipelineTrace trace;
      const auto aug = unlabelled ? unlabelled_pipeline(img, rng, policy, &trace) : labelled_pipeline(img, rng, policy, &trace);
      const char* name = unlabelled ? "unlabelled" : "labelled";
      write_ppm((dir / (stem + name + ".ppm")).string(), aug);
      csv << i << ',' << name << ',' << (trace.flipped ? 1 : 0) << ',' << detail::num(trace.cutout_fraction) << ','
          << detail::describe(trace) << '\n';
    }
  }
  out << "wrote " << std::min(a.count, ds.size()) << " samples to " << dir.string() << '\n';
  return kOk;
}

struct InvarianceArgs {
  detail::ConfigArgs cfg;
  std::string checkpoint, transform = "pipeline", split = "test", out = "out";
  std::size_t trials = 5, draws = 1000;
  std::vector<std::size_t> na_grid;
};

inline int run_invariance(const InvarianceArgs& a, std::ostream& out) {
  const RunConfig cfg = a.cfg.resolve();
  if (a.split != "train" && a.split != "test") throw InvalidConfig("--split must be train or test");
  const std::filesystem::path dir = a.out;
  Json snap = to_json(cfg);
  snap["checkpoint"] = a.checkpoint;
  snap["transform"] = a.transform;
  snap["split"] = a.split;
  snap["trials"] = a.trials;
  detail::snapshot(dir, snap, out);

  const std::optional<TransformSpec> fixed =
      a.transform == "pipeline" ? std::nullopt : std::optional<TransformSpec>(detail::parse_transform(a.transform));
  const auto ckpt = read_checkpoint(a.checkpoint);
  const TrainData data = prepare_data(cfg);
  if (a.split == "test" && !data.test) throw InputError("no test set for this dataset; use --split train");
  const Dataset& ds = a.split == "test" ? *data.test : data.train;
  if (ckpt.model.input_dim() != ds.dim()) throw InputError("checkpoint input width does not match the dataset");
  const AugmentPolicy policy = default_policy(data.train, true);
  const Augmentation u = fixed ? fixed_transform(*fixed, policy.normalization) : pipeline_augmentation(policy, true);

  InvarianceOptions opts;
  opts.trials = a.trials;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  opts.description = a.transform;
  const auto rep = augmentation_invariance(ckpt.model, ds, u, policy.normalization, opts);
  auto csv = detail::open_output(dir / "invariance.csv");
  csv << "dataset,augmentation,trials,clean_accuracy,augmented_accuracy,v_z\n"
      << ds.tag << ',' << a.transform << ',' << rep.trials << ',' << detail::num(rep.clean_accuracy) << ','
      << detail::num(rep.augmented_accuracy) << ',' << detail::num(rep.v_z) << '\n';
  out << "V_Z = " << detail::num(rep.v_z) << " (clean " << detail::num(rep.clean_accuracy) << ", augmented "
      << detail::num(rep.augmented_accuracy) << ")\n";

  if (!a.na_grid.empty()) {
    const auto rows = multisample_variance_study(ckpt.model, ds, u, a.na_grid, a.draws, cfg.seed, cfg.threads);
    auto vcsv = detail::open_output(dir / "variance.csv");
    vcsv << "n_a,variance,standard_error,mean_loss\n";
    for (const auto& r : rows)
      vcsv << r.n_a << ',' << detail::num(r.variance) << ',' << detail::num(r.standard_error) << ','
           << detail::num(r.mean_loss) << '\n';
  }
  return kOk;
}

struct HoeffdingArgs {
  std::vector<std::size_t> na{3};
  std::vector<double> eps{0.5};
  std::vector<std::string> samplers{"bernoulli"};
  std::size_t trials = 100000, mean_draws = 1000000;
  std::uint64_t seed = 0;
  std::string out = "out";
};

inline int run_hoeffding(const HoeffdingArgs& a, std::ostream& out) {
  const std::filesystem::path dir = a.out;
  detail::snapshot(dir,
                   Json{{"command", "hoeffding"}, {"na", a.na}, {"eps", a.eps}, {"samplers", a.samplers},
                        {"trials", a.trials}, {"mean_draws", a.mean_draws}, {"seed", a.seed}},
                   out);
  auto csv = detail::open_output(dir / "hoeffding.csv");
  csv << "sampler,n_a,eps,width,bound,empirical_tail,standard_error,within_bound\n";
  for (const auto& name : a.samplers) {
    LossSampler sampler;
    if (name == "bernoulli") {
      sampler = bernoulli_sampler(0.5);
    } else if (name == "gaussian") {
      sampler = clipped_gaussian_sampler(0.5, 0.25, 0.0, 1.0);
    } else {
      throw InvalidConfig("unknown sampler '" + name + "' (expected bernoulli or gaussian)");
    }
    for (std::size_t na : a.na) {
      for (double eps : a.eps) {
        HoeffdingOptions opts;
        opts.n_a = na;
        opts.eps = eps;
        opts.trials = a.trials;
        opts.mean_draws = a.mean_draws;
        opts.seed = derive_seed({a.seed, na, static_cast<std::uint64_t>(std::llround(eps * 1e6))});
        const auto r = hoeffding_check(sampler, opts);
        csv << name << ',' << na << ',' << detail::num(eps) << ',' << detail::num(r.width) << ','
            << detail::num(r.bound) << ',' << detail::num(r.empirical_tail) << ',' << detail::num(r.standard_error)
            << ',' << (r.within_bound() ? 1 : 0) << '\n';
        out << name << " n_a=" << na << " eps=" << detail::num(eps) << ": tail " << detail::num(r.empirical_tail)
            << " +/- " << detail::num(r.standard_error) << ", bound " << detail::num(r.bound)
            << (r.within_bound() ? "" : "  EXCEEDED") << '\n';
      }
    }
  }
  return kOk;
}

struct AblationArgs {
  detail::ConfigArgs cfg;
  std::string data, labels, out = "out";
};

inline int run_ablation(const AblationArgs& a, std::ostream& out) {
  RunConfig cfg = a.cfg.resolve();
  DataSources src;
  if (!a.data.empty()) cfg.dataset = a.data;
  detail::apply_labels_arg(a.labels, cfg, src);
  cfg.validate();
  const std::filesystem::path dir = a.out;
  detail::snapshot(dir, to_json(cfg), out);
  const auto rows = pseudo_label_ablation(cfg, prepare_data(cfg, src));
  auto csv = detail::open_output(dir / "ablation.csv");
  csv << "epoch,network_pl_accuracy,graph_pl_accuracy,network_test_error,graph_test_error\n";
  for (const auto& r : rows)
    csv << r.epoch << ',' << detail::num(r.network_pl_accuracy) << ',' << detail::num(r.graph_pl_accuracy) << ','
        << detail::num(r.network_test_error) << ',' << detail::num(r.graph_test_error) << '\n';
  if (!rows.empty())
    out << "last epoch pseudo-label accuracy: network " << detail::num(rows.back().network_pl_accuracy) << ", graph "
        << detail::num(rows.back().graph_pl_accuracy) << '\n';
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Graph-based semi-supervised training with multi-sample augmentation", "gssl"};
  app.footer(kSchemas);
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "supervised init followed by pseudo-label training");
  train.cfg.attach(train_cmd);
  train_cmd->add_option("--data", train.data, "synthetic dataset name or CIFAR binary file");
  train_cmd->add_option("--test-data", train.test_data, "CIFAR binary test file");
  train_cmd->add_option("--labels", train.labels, "labelled count, or split file of index[,label] lines");
  train_cmd->add_option("--out", train.out, "output directory");

  PropagateArgs prop;
  auto* prop_cmd = app.add_subcommand("propagate", "graph pseudo-labels for an embedding file");
  prop.cfg.attach(prop_cmd);
  prop_cmd->add_option("--embeddings", prop.embeddings, "LPEM or CSV embedding file")->required();
  prop_cmd->add_option("--labels", prop.labels, "split file of index,label lines")->required();
  prop_cmd->add_option("--k", prop.k, "neighbours per node");
  prop_cmd->add_option("--mu", prop.mu, "fidelity weight");
  prop_cmd->add_option("--classes", prop.classes, "class count (default: largest label + 1)");
  prop_cmd->add_option("--out", prop.out, "output directory");

  AugmentDemoArgs demo;
  auto* demo_cmd = app.add_subcommand("augment-demo", "write original and augmented images as PPM");
  demo_cmd->add_option("--data", demo.data, "image dataset name or CIFAR binary file");
  demo_cmd->add_option("--count", demo.count, "number of samples");
  demo_cmd->add_option("--seed", demo.seed, "seed");
  demo_cmd->add_option("--out", demo.out, "output directory");

  InvarianceArgs inv;
  auto* inv_cmd = app.add_subcommand("invariance", "augmentation invariance V_Z of a trained model");
  inv.cfg.attach(inv_cmd);
  inv_cmd->add_option("--checkpoint", inv.checkpoint, "model.lpck written by train")->required();
  inv_cmd->add_option("--transform", inv.transform, "'pipeline' or Name:magnitude, e.g. Rotate:30");
  inv_cmd->add_option("--split", inv.split, "train or test");
  inv_cmd->add_option("--trials", inv.trials, "augmentation draws per sample");
  inv_cmd->add_option("--na-grid", inv.na_grid, "also run the loss-variance study for these n_a values");
  inv_cmd->add_option("--draws", inv.draws, "draws per n_a in the variance study");
  inv_cmd->add_option("--out", inv.out, "output directory");

  HoeffdingArgs hoef;
  auto* hoef_cmd = app.add_subcommand("hoeffding", "Monte-Carlo check of the multi-sample concentration bound");
  hoef_cmd->add_option("--na", hoef.na, "replica counts");
  hoef_cmd->add_option("--eps", hoef.eps, "deviations");
  hoef_cmd->add_option("--sampler", hoef.samplers, "bernoulli and/or gaussian");
  hoef_cmd->add_option("--trials", hoef.trials, "Monte-Carlo trials");
  hoef_cmd->add_option("--mean-draws", hoef.mean_draws, "draws used to estimate the mean");
  hoef_cmd->add_option("--seed", hoef.seed, "seed");
  hoef_cmd->add_option("--out", hoef.out, "output directory");

  AblationArgs abl;
  auto* abl_cmd = app.add_subcommand("ablation", "network versus graph pseudo-labels, paired runs");
  abl.cfg.attach(abl_cmd);
  abl_cmd->add_option("--data", abl.data, "synthetic dataset name or CIFAR binary file");
  abl_cmd->add_option("--labels", abl.labels, "labelled count, or split file");
  abl_cmd->add_option("--out", abl.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  try {
    if (train_cmd->parsed()) return run_train(train, out);
    if (prop_cmd->parsed()) return run_propagate(prop, out);
    if (demo_cmd->parsed()) return run_augment_demo(demo, out);
    if (inv_cmd->parsed()) return run_invariance(inv, out);
    if (hoef_cmd->parsed()) return run_hoeffding(hoef, out);
    if (abl_cmd->parsed()) return run_ablation(abl, out);
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace gssl::cli
