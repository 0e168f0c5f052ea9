// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gssl/align/alignment.hpp"
#include "gssl/augment/pipeline.hpp"
#include "gssl/backbone/mlp.hpp"
#include "gssl/cli/app.hpp"
#include "gssl/graph/propagation.hpp"
#include "gssl/metrics/ablation.hpp"
#include "gssl/metrics/evaluation.hpp"
#include "gssl/metrics/hoeffding.hpp"
#include "gssl/trainer/setup.hpp"
#include "oracles.hpp"

namespace {

using namespace gssl;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::size_t worker_count() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

LabelSeed random_seed(std::mt19937_64& rng, int n, int classes) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const int per_class = std::max(1, std::min(1 + static_cast<int>(rng() % 3), n / (2 * classes)));
  std::vector<std::size_t> chosen;
  std::vector<int> labels;
  for (int c = 0; c < classes; ++c)
    for (int r = 0; r < per_class; ++r) {
      chosen.push_back(idx[chosen.size()]);
      labels.push_back(c);
    }
  return LabelSeed::make(static_cast<std::size_t>(n), static_cast<std::size_t>(classes), chosen, labels);
}

// ------------------------------------------------------------------ 1
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t argmax_mismatch = 0;
  for (int g = 0; g < 50; ++g) {
    const int n = 20 + static_cast<int>(rng() % 181);
    const int classes = 2 + static_cast<int>(rng() % 9);
    const int k = 3 + static_cast<int>(rng() % 12);
    const EmbeddingMatrix v(RowMatrix(oracle::random_unit_rows(n, 2 + static_cast<int>(rng() % 8), rng)));
    const auto a = normalize_affinity(build_knn_affinity(v, static_cast<std::size_t>(k)));
    const auto y = build_label_matrix(random_seed(rng, n, classes));
    PropagationConfig cfg;
    cfg.mu = 0.01;
    const auto res = solve_propagation(a, y, cfg);
    const Eigen::MatrixXd expected = oracle::propagate_dense(a.to_dense(), y, cfg.mu);
    worst = std::max(worst, (res.scores - expected).cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      Eigen::Index best;
      expected.row(i).maxCoeff(&best);
      argmax_mismatch += argmax_row(res.scores.row(i)) != best;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && argmax_mismatch == 0 && secs < 60.0,
          fmt("50 graphs, max |CG - dense| = %.2e (tol 1e-5), argmax mismatches %zu, %.1fs", worst, argmax_mismatch,
              secs)};
}

// ------------------------------------------------------------------ 2
Outcome laplacian_consistency() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 30 + static_cast<int>(rng() % 120);
    const int classes = 2 + static_cast<int>(rng() % 5);
    const EmbeddingMatrix v(RowMatrix(oracle::random_unit_rows(n, 4, rng)));
    const auto w = build_knn_affinity(v, 6);
    const auto a = normalize_affinity(w);
    const auto y = build_label_matrix(random_seed(rng, n, classes));
    PropagationConfig cfg;
    const auto f = solve_propagation(a, y, cfg).scores;
    const double fast = laplacian_cost(a, f, y, cfg.mu);
    const double naive = oracle::laplacian_cost_dense(w.to_dense(), f, y, cfg.mu);
    worst = std::max(worst, std::abs(fast - naive) / std::abs(naive));
  }
  return {worst < 1e-10, fmt("20 instances, max relative difference %.2e (tol 1e-10)", worst)};
}

// ------------------------------------------------------------------ 3
Outcome two_moons_propagation() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.k = 10;
  cfg.mu = 0.001;
  cfg.similarity = "gaussian";
  double total = 0.0;
  std::string per_seed;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto ds = two_moons(1000, 0.1, s);
    const auto seed = make_split(ds, {6, s, true});
    const auto pl = graph_pseudo_labels(ds.inputs, seed, cfg);
    const double acc = label_accuracy(pl.labels, ds.labels, seed.unlabelled);
    total += acc;
    per_seed += fmt(" %.4f", acc);
  }
  const double mean = total / 5.0, secs = seconds_since(t0);
  return {mean >= 0.99 && secs < 10.0, fmt("mean accuracy %.4f (>= 0.99), seeds:%s, %.1fs", mean, per_seed.c_str(), secs)};
}

// ------------------------------------------------------------------ 4
Outcome ablation_direction() {
  RunConfig cfg;
  cfg.dataset = "two_moons";
  cfg.n_train = 1000;
  cfg.n_test = 0;
  cfg.n_labelled = 6;
  cfg.init_epochs = 200;  // n_l < b, so one step per pass
  cfg.hidden = {64, 32};
  cfg.k = 10;
  cfg.mu = 0.001;
  cfg.l2_embedding = false;
  cfg.similarity = "gaussian";
  cfg.threads = worker_count();
  bool all = true;
  std::string per_seed;
  for (std::uint64_t s = 0; s < 5; ++s) {
    cfg.seed = s;
    const auto data = prepare_data(cfg);
    Trainer tr(cfg, data);
    tr.supervised_init();
    const auto snap = compare_pseudo_labels(tr.model(), tr.clean_train(), data.seed, data.train.labels, cfg);
    all = all && tr.counters().init_steps == 200 && snap.graph_accuracy >= snap.network_accuracy;
    per_seed += fmt(" [graph %.3f, net %.3f]", snap.graph_accuracy, snap.network_accuracy);
  }
  return {all, "200-step backbone, graph >= network on every seed:" + per_seed};
}

// ------------------------------------------------------------------ 5
Outcome alignment() {
  // Fixed point: D_U already equals the prior.
  PredictionMatrix fixed(4, 2);
  fixed << 0.75, 0.25, 0.125, 0.875, 0.6, 0.4, 0.3, 0.7;
  const bool exact = smooth_align(fixed, PriorDistribution::uniform(2), {2, 3}, {0, 1}, {}).scores == fixed;

  // Skewed: half of the unlabelled argmaxes on class 0, the rest spread over
  // classes 1..9; class-0 rows lead their runner-up by a small random margin.
  const int classes = 10, n = 1000, n_labelled = 20;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PredictionMatrix f(n, classes);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < classes; ++c) f(i, c) = 0.05 * u(rng);
    if (i >= n_labelled && (i - n_labelled) % 2 == 0) {
      f(i, 0) = 1.0;
      f(i, 1 + static_cast<int>(rng() % 9)) = std::exp(-0.5 * u(rng));
    } else {
      f(i, 1 + i % 9) = 1.0;
    }
    f.row(i) /= f.row(i).sum();
  }
  std::vector<std::size_t> labelled, unlabelled;
  for (int i = 0; i < n; ++i) (i < n_labelled ? labelled : unlabelled).push_back(static_cast<std::size_t>(i));
  const auto prior = PriorDistribution::uniform(classes);
  AlignConfig cfg;
  cfg.max_iter = 10;
  const auto res = smooth_align(f, prior, labelled, unlabelled, cfg);
  const double start_share = empirical_class_distribution(f, unlabelled)[0];

  std::vector<double> l1;
  for (const auto& d : res.trace) {
    double s = 0.0;
    for (int c = 0; c < classes; ++c) s += std::abs(d[c] - prior[c]);
    l1.push_back(s);
  }
  bool decreasing = l1.size() == 11;
  for (std::size_t t = 1; t < l1.size(); ++t) decreasing = decreasing && l1[t] < l1[t - 1];
  double row_err = 0.0;
  for (int i = 0; i < n; ++i) {
    row_err = std::max(row_err, std::abs(res.scores.row(i).sum() - 1.0));
    row_err = std::max(row_err, std::max(0.0, -res.scores.row(i).minCoeff()));
  }
  std::string trace;
  for (double x : l1) trace += fmt(" %.3f", x);
  return {exact && decreasing && row_err <= 1e-6 && start_share == 0.5,
          fmt("fixed point exact: %s; class-0 share %.2f; L1 to prior:%s; worst row error %.1e", exact ? "yes" : "no",
              start_share, trace.c_str(), row_err)};
}

// ------------------------------------------------------------------ 6
double min_abs_preactivation(const Mlp& model, const RowMatrix& x) {
  ForwardCache cache;
  model.forward(x, &cache);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) m = std::min(m, cache.pre[l].cwiseAbs().minCoeff());
  return m;
}

Outcome gradient_correctness() {
  double worst = 0.0;
  std::size_t params = 0;
  for (int net = 0; net < 10; ++net) {
    Rng rng(7000 + static_cast<std::uint64_t>(net));
    const MlpSpec spec{3 + static_cast<std::size_t>(net % 4), {5 + static_cast<std::size_t>(net % 3), 4},
                       2 + static_cast<std::size_t>(net % 3), net % 2 == 0};
    Mlp model(spec, rng);
    for (auto& l : model.layers())
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = 0.1 * normal(rng);
    RowMatrix x(6, static_cast<Eigen::Index>(spec.input_dim));
    do {
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    } while (min_abs_preactivation(model, x) < 1e-3);
    RowMatrix t(6, static_cast<Eigen::Index>(spec.classes));
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = uniform(rng);
    for (Eigen::Index i = 0; i < t.rows(); ++i) t.row(i) /= t.row(i).sum();

    Gradients grads;
    model.loss_and_gradients(x, t, grads);
    const auto analytic = flatten(grads);
    const auto theta = model.flat_parameters();
    const double h = 1e-5;
    for (std::size_t p = 0; p < theta.size(); ++p) {
      Mlp probe = model;
      auto plus = theta, minus = theta;
      plus[p] += h;
      minus[p] -= h;
      probe.set_flat_parameters(plus);
      const double lp = cross_entropy_from_logits(probe.forward(x).logits, t);
      probe.set_flat_parameters(minus);
      const double lm = cross_entropy_from_logits(probe.forward(x).logits, t);
      const double fd = (lp - lm) / (2 * h);
      worst = std::max(worst, std::abs(analytic[p] - fd) / std::max(std::abs(analytic[p]), 1e-8));
    }
    params += theta.size();
  }
  return {worst < 1e-4, fmt("10 networks, %zu parameters, max relative error %.2e (tol 1e-4)", params, worst)};
}

// ------------------------------------------------------------------ 7
Outcome hoeffding_grid() {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> nas{1, 3, 5};
  const std::vector<double> epss{0.1, 0.3, 0.5};
  bool bounded = true, monotone = true;
  double worst_margin = -1.0;
  std::size_t cases = 0;
  for (const bool gaussian : {false, true}) {
    const LossSampler sampler = gaussian ? clipped_gaussian_sampler(0.5, 0.25, 0.0, 1.0) : bernoulli_sampler(0.5);
    for (double eps : epss) {
      double prev = 2.0;
      for (std::size_t na : nas) {
        HoeffdingOptions opts;
        opts.n_a = na;
        opts.eps = eps;
        opts.trials = 100000;
        opts.mean_draws = 1000000;
        opts.seed = derive_seed({707, gaussian ? 1u : 0u, na, static_cast<std::uint64_t>(eps * 10)});
        const auto r = hoeffding_check(sampler, opts);
        bounded = bounded && r.within_bound();
        monotone = monotone && r.empirical_tail <= prev;
        prev = r.empirical_tail;
        worst_margin = std::max(worst_margin, r.empirical_tail - r.bound - 3.0 * r.standard_error);
        ++cases;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bounded && monotone && secs < 60.0,
          fmt("%zu cases, all within bound + 3 SE: %s (worst tail - bound - 3SE = %.3f), nonincreasing in n_a: %s, %.1fs",
              cases, bounded ? "yes" : "no", worst_margin, monotone ? "yes" : "no", secs)};
}

// ------------------------------------------------------------------ 8, 9
struct SurrogateRun {
  double init_error = 0.0;
  double final_error = 0.0;
  double v_z = 0.0;
  double clean_accuracy = 0.0;
  double augmented_accuracy = 0.0;
};

RunConfig surrogate_config(std::size_t n_a, std::uint64_t seed) {
  RunConfig cfg;
  cfg.dataset = "moon_images";
  cfg.n_train = 2000;
  cfg.n_test = 1000;
  cfg.n_labelled = 10;
  cfg.S = 3000;
  cfg.lr_horizon = 3000;
  cfg.b = 64;
  cfg.b_l = 16;
  cfg.hidden = {64, 32};
  cfg.n_a = n_a;
  cfg.seed = seed;
  cfg.threads = worker_count();
  return cfg;
}

SurrogateRun surrogate_run(std::size_t n_a, std::uint64_t seed) {
  const RunConfig cfg = surrogate_config(n_a, seed);
  const auto data = prepare_data(cfg);
  Trainer tr(cfg, data);
  const auto res = tr.train();
  InvarianceOptions opts;
  opts.seed = derive_seed({seed, 0x767A});
  opts.threads = cfg.threads;
  const auto rep =
      augmentation_invariance(tr.model(), *data.test, pipeline_augmentation(tr.policy(), true), tr.policy().normalization, opts);
  return {res.init_test_error, res.final_test_error, rep.v_z, rep.clean_accuracy, rep.augmented_accuracy};
}

std::vector<std::vector<SurrogateRun>> g_runs;  // [n_a index][seed]
double g_surrogate_seconds = 0.0;

void run_surrogates() {
  const auto t0 = Clock::now();
  for (std::size_t na : {1u, 3u}) {
    g_runs.emplace_back();
    for (std::uint64_t s = 0; s < 5; ++s) g_runs.back().push_back(surrogate_run(na, s));
  }
  g_surrogate_seconds = seconds_since(t0);
}

Outcome multi_sample_benefit() {
  if (g_runs.empty()) run_surrogates();
  double err[2] = {0, 0}, vz[2] = {0, 0}, clean[2] = {0, 0}, aug[2] = {0, 0};
  for (int a = 0; a < 2; ++a)
    for (const auto& r : g_runs[a]) {
      err[a] += r.final_error / 5.0;
      vz[a] += r.v_z / 5.0;
      clean[a] += r.clean_accuracy / 5.0;
      aug[a] += r.augmented_accuracy / 5.0;
    }
  return {err[1] <= err[0] && vz[1] >= vz[0] && g_surrogate_seconds < 1200.0,
          fmt("mean test error n_a=3 %.4f vs n_a=1 %.4f; mean V_Z(test) n_a=3 %.4f vs n_a=1 %.4f "
              "(clean accuracy %.4f vs %.4f, augmented accuracy %.4f vs %.4f); 10 runs %.0fs",
              err[1], err[0], vz[1], vz[0], clean[1], clean[0], aug[1], aug[0], g_surrogate_seconds)};
}

Outcome semi_supervised_gain() {
  if (g_runs.empty()) run_surrogates();
  int wins = 0;
  std::string per_seed;
  for (const auto& r : g_runs[1]) {
    wins += r.final_error < r.init_error;
    per_seed += fmt(" [%.3f -> %.3f]", r.init_error, r.final_error);
  }
  return {wins >= 4, fmt("n_a=3 runs beat supervised init on %d/5 seeds (>= 4):", wins) + per_seed};
}

// ------------------------------------------------------------------ 10
ImageBuffer random_image(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  ImageBuffer img(h, w, c);
  for (auto& v : img.data) v = from_level(static_cast<int>(uniform_index(rng, 256)));
  return img;
}

Outcome augmentation_contracts() {
  Rng rng(1010);
  bool identity = true;
  for (int t = 0; t < 100; ++t) {
    const auto img = random_image(rng, 8 + t % 25, 8 + t % 19, t % 2 ? 3 : 1);
    for (const TransformSpec spec : {TransformSpec{TransformKind::kIdentity, 0.0}, {TransformKind::kRotate, 0.0},
                                     {TransformKind::kShearX, 0.0}, {TransformKind::kShearY, 0.0},
                                     {TransformKind::kTranslateX, 0.0}, {TransformKind::kTranslateY, 0.0},
                                     {TransformKind::kSolarize, 1.0}, {TransformKind::kPosterise, 8.0}})
      identity = identity && apply_transform(img, spec) == img;
    identity = identity && detail::blend(detail::smooth(img), img, 1.0) == img;
  }

  std::size_t fuzz_fail = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto kind = kAllTransformKinds[static_cast<std::size_t>(t) % kTransformKindCount];
    const auto r = magnitude_range(kind);
    double m = uniform(rng, r.lo, r.hi);
    if (r.integral) m = std::round(m);
    const auto img = random_image(rng, 3 + uniform_index(rng, 30), 3 + uniform_index(rng, 30), t % 3 == 0 ? 3 : 1);
    const auto out = apply_transform(img, {kind, m});
    fuzz_fail += !(out.same_shape(img) && out.in_unit_range());
  }

  bool counts = true;
  const AugmentPolicy policy;
  for (int t = 0; t < 1000; ++t) {
    const auto img = random_image(rng, 16, 16, 1 + 2 * (t % 2));
    PipelineTrace lt, ut;
    labelled_pipeline(img, rng, policy, &lt);
    unlabelled_pipeline(img, rng, policy, &ut);
    counts = counts && lt.applied.size() == 1 && ut.applied.size() == 2;
  }
  return {identity && fuzz_fail == 0 && counts,
          fmt("identity magnitudes bitwise: %s; 10^4 fuzz cases over 14 transforms, failures %zu; RandAugment draws "
              "labelled 1 / unlabelled 2: %s",
              identity ? "yes" : "no", fuzz_fail, counts ? "yes" : "no")};
}

// ------------------------------------------------------------------ 11
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "gssl_acceptance_determinism";
  fs::remove_all(root);
  const auto train = [&](const std::string& name) {
    const std::string out = (root / name).string();
    const std::vector<std::string> args = {"gssl", "train", "--seed", "11", "--out", out,
                                           "--set", "S=300", "--set", "training.lr_horizon=300",
                                           "--set", "b=64", "--set", "b_l=16", "--set", "model.hidden=[32,16]",
                                           "--set", "data.n_train=800", "--set", "data.n_test=200",
                                           "--set", "training.init_epochs=20", "--threads", name == "a" ? "1" : "4"};
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    std::ostringstream sink;
    return cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink);
  };
  const int ra = train("a"), rb = train("b");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(root / "a" / "metrics.csv"), b = slurp(root / "b" / "metrics.csv");
  fs::remove_all(root);
  const auto lines = std::count(a.begin(), a.end(), '\n');
  return {ra == 0 && rb == 0 && !a.empty() && a == b,
          fmt("two train runs (1 and 4 threads), metrics.csv %zu bytes / %ld lines, byte-identical: %s", a.size(),
              static_cast<long>(lines), a == b ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"laplacian cost consistency", laplacian_consistency},
      {"two moons propagation", two_moons_propagation},
      {"graph vs network pseudo-labels", ablation_direction},
      {"distribution alignment", alignment},
      {"gradient correctness", gradient_correctness},
      {"hoeffding verification", hoeffding_grid},
      {"multi-sample benefit", multi_sample_benefit},
      {"semi-supervised gain", semi_supervised_gain},
      {"augmentation contracts", augmentation_contracts},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
