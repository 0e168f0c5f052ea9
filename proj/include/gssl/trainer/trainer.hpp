#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gssl/augment/pipeline.hpp"
#include "gssl/backbone/checkpoint.hpp"
#include "gssl/backbone/mixup.hpp"
#include "gssl/backbone/mlp.hpp"
#include "gssl/backbone/sgd.hpp"
#include "gssl/core/parallel.hpp"
#include "gssl/core/random.hpp"
#include "gssl/data/dataset.hpp"
#include "gssl/trainer/config.hpp"
#include "gssl/trainer/pseudo_label.hpp"

namespace gssl {

struct TrainData {
  Dataset train;  // ground truth for every row; only `seed.labelled` is used for supervision
  LabelSeed seed;
  std::optional<Dataset> test;
};

struct EpochMetrics {
  std::uint64_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double pl_accuracy = std::numeric_limits<double>::quiet_NaN();
  double test_error = std::numeric_limits<double>::quiet_NaN();
};

struct PseudoLabelState {
  std::vector<int> labels;
  std::size_t epoch = 0;  // epoch whose steps may consume these labels
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  PseudoLabelOutcome outcome;
};

struct TrainCounters {
  std::size_t init_epochs = 0;
  std::uint64_t init_steps = 0;
  std::uint64_t ssl_steps = 0;
  std::uint64_t forward_rows = 0;      // rows pushed through the network by ssl_step
  std::uint64_t loss_evaluations = 0;  // loss terms computed by ssl_step
  std::size_t pseudo_label_rounds = 0;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  double init_test_error = std::numeric_limits<double>::quiet_NaN();
  double final_test_error = std::numeric_limits<double>::quiet_NaN();
  TrainCounters counters;
};

// Default augmentation for a dataset: the full policy for images with
// CIFAR-10 statistics on colour inputs and none on grayscale.
inline AugmentPolicy default_policy(const Dataset& ds, bool augment) {
  AugmentPolicy p = augment ? AugmentPolicy{} : AugmentPolicy::identity();
  if (ds.image && ds.image->channels == 3) p.normalization = Normalization::cifar10();
  return p;
}

inline void write_metrics_header(std::ostream& out) { out << "step,epoch,lr,train_loss,pl_accuracy,test_error\n"; }

inline void write_metrics_row(std::ostream& out, const EpochMetrics& m) {
  const auto num = [](double v) {
    if (std::isnan(v)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  out << m.step << ',' << m.epoch << ',' << num(m.lr) << ',' << num(m.train_loss) << ',' << num(m.pl_accuracy) << ','
      << num(m.test_error) << '\n';
}

class Trainer {
 public:
  Trainer(RunConfig cfg, TrainData data, std::optional<AugmentPolicy> policy = std::nullopt)
      : cfg_(std::move(cfg)), data_(std::move(data)) {
    cfg_.validate();
    data_.train.validate();
    data_.seed.validate();
    if (data_.seed.n != data_.train.size()) throw InputError("label seed does not match the training set size");
    if (data_.seed.labelled.empty()) throw InputError("training needs at least one labelled sample");
    if (data_.test) {
      data_.test->validate();
      if (data_.test->dim() != data_.train.dim()) throw InputError("test set input width differs from training set");
    }
    policy_ = policy ? *policy : default_policy(data_.train, cfg_.augment);
    policy_.validate();
    Rng init_rng = make_rng({cfg_.seed, kStreamInit});
    model_ = Mlp(MlpSpec{data_.train.dim(), cfg_.hidden, data_.train.classes, cfg_.l2_embedding}, init_rng);
    sgd_state_ = make_sgd_state(model_);
    clean_train_ = clean_inputs(data_.train);
    if (data_.test) clean_test_ = clean_inputs(*data_.test);
  }

  const RunConfig& config() const { return cfg_; }
  const Mlp& model() const { return model_; }
  Mlp& model() { return model_; }
  const TrainCounters& counters() const { return counters_; }
  const SgdState& optimizer_state() const { return sgd_state_; }
  const AugmentPolicy& policy() const { return policy_; }
  const RowMatrix& clean_train() const { return clean_train_; }
  const PseudoLabelState& pseudo_labels() const { return pseudo_; }
  std::size_t current_epoch() const { return epoch_; }

  // Where model and optimizer state are written if a step diverges.
  void set_dump_path(std::string path) { dump_path_ = std::move(path); }

  // Supervised phase: init_epochs passes over the labelled set, batch min(b, n_l),
  // constant learning rate, labelled pipeline, MixUp.
  double supervised_init() {
    const auto& lab = data_.seed.labelled;
    const std::size_t batch = std::min(cfg_.b, lab.size());
    SgdConfig sgd = sgd_config();
    sgd.horizon = std::numeric_limits<std::uint64_t>::max();
    SgdState state = make_sgd_state(model_);
    std::vector<std::size_t> order(lab.size());
    std::vector<int> truth(lab.size());
    double last_loss = 0.0;
    for (std::size_t epoch = 0; epoch < cfg_.init_epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng = make_rng({cfg_.seed, kStreamInitOrder, epoch});
      shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += batch) {
        std::vector<std::size_t> idx;
        std::vector<int> labels;
        for (std::size_t p = start; p < std::min(start + batch, order.size()); ++p) {
          idx.push_back(lab[order[p]]);
          labels.push_back(data_.seed.labels[order[p]]);
        }
        const auto [x, t] = build_batch(idx, labels, std::vector<bool>(idx.size(), true), kStreamInitAug,
                                        counters_.init_steps);
        last_loss = optimize(x, t, sgd, state, make_rng({cfg_.seed, kStreamInitMix, counters_.init_steps}),
                             "supervised initialisation step " + std::to_string(counters_.init_steps));
        ++counters_.init_steps;
      }
      ++counters_.init_epochs;
    }
    return last_loss;
  }

  // Unaugmented features -> graph (or network) pseudo-labels for `epoch`.
  const PseudoLabelState& pseudo_label_epoch(std::size_t epoch) {
    const auto out = model_.forward(clean_train_);
    PseudoLabelState st;
    st.outcome = cfg_.pseudo_label_source() == PseudoLabelSource::kGraph
                     ? graph_pseudo_labels(out.embeddings, data_.seed, cfg_)
                     : network_pseudo_labels(out.probs, data_.seed);
    st.labels = st.outcome.labels;
    st.epoch = epoch;
    st.accuracy = label_accuracy(st.labels, data_.train.labels, data_.seed.unlabelled);
    pseudo_ = std::move(st);
    ++counters_.pseudo_label_rounds;
    return pseudo_;
  }

  // One composite-batch step: b_l labelled and b_u pseudo-labelled samples,
  // n_a augmented replicas each, one cross-entropy term averaged over all
  // b n_a rows, one optimizer update.
  double ssl_step(const std::vector<std::size_t>& labelled_batch, const std::vector<std::size_t>& unlabelled_batch) {
    if (pseudo_.labels.empty()) throw InputError("ssl_step called before pseudo-labelling");
    if (pseudo_.epoch != epoch_)
      throw InputError("pseudo-labels from epoch " + std::to_string(pseudo_.epoch) + " used in epoch " +
                       std::to_string(epoch_));
    std::vector<std::size_t> idx;
    std::vector<int> labels;
    std::vector<bool> is_labelled;
    for (std::size_t k : labelled_batch) {
      idx.push_back(data_.seed.labelled[k]);
      labels.push_back(data_.seed.labels[k]);
      is_labelled.push_back(true);
    }
    for (std::size_t i : unlabelled_batch) {
      idx.push_back(i);
      labels.push_back(pseudo_.labels[i]);
      is_labelled.push_back(false);
    }
    const std::uint64_t step = sgd_state_.step;
    const auto [x, t] = build_batch(idx, labels, is_labelled, kStreamSslAug, step);
    counters_.forward_rows += static_cast<std::uint64_t>(x.rows());
    ++counters_.loss_evaluations;
    const double loss = optimize(x, t, sgd_config(), sgd_state_, make_rng({cfg_.seed, kStreamSslMix, step}),
                                 "step " + std::to_string(step) + " (epoch " + std::to_string(epoch_) + ")");
    ++counters_.ssl_steps;
    return loss;
  }

  // Supervised initialisation, then epochs of pseudo-labelling followed by
  // floor(n_u / b_u) composite steps, until at least S steps have run.
  TrainResult train(const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
    TrainResult result;
    supervised_init();
    if (data_.test) result.init_test_error = test_error();
    const auto& unl = data_.seed.unlabelled;
    const std::size_t b_u = cfg_.b_u();
    if (unl.size() < b_u)
      throw InvalidConfig("unlabelled set (" + std::to_string(unl.size()) + ") smaller than b_u = " + std::to_string(b_u));
    const std::size_t steps_per_epoch = unl.size() / b_u;
    sgd_state_ = make_sgd_state(model_);
    LabelledCycler cycler(data_.seed.labelled.size(), cfg_.seed);

    while (sgd_state_.step < cfg_.S) {
      ++epoch_;
      pseudo_label_epoch(epoch_);
      std::vector<std::size_t> order = unl;
      Rng rng = make_rng({cfg_.seed, kStreamEpochOrder, epoch_});
      shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      double lr = 0.0;
      for (std::size_t s = 0; s < steps_per_epoch; ++s) {
        std::vector<std::size_t> lb(cfg_.b_l);
        for (auto& k : lb) k = cycler.next();
        const std::vector<std::size_t> ub(order.begin() + static_cast<std::ptrdiff_t>(s * b_u),
                                          order.begin() + static_cast<std::ptrdiff_t>((s + 1) * b_u));
        lr = sgd_config().learning_rate(sgd_state_.step);
        loss_sum += ssl_step(lb, ub);
      }
      EpochMetrics m;
      m.step = sgd_state_.step;
      m.epoch = epoch_;
      m.lr = lr;
      m.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
      m.pl_accuracy = pseudo_.accuracy;
      if (data_.test) m.test_error = test_error();
      result.metrics.push_back(m);
      if (on_epoch) on_epoch(m);
    }
    result.final_test_error = data_.test ? test_error() : std::numeric_limits<double>::quiet_NaN();
    result.counters = counters_;
    return result;
  }

  RowMatrix predict_probs(const RowMatrix& clean) const { return model_.forward(clean).probs; }

  double test_error() const {
    if (!data_.test) throw InputError("no test set");
    return error_rate(predict_probs(clean_test_), data_.test->labels);
  }

  // Normalized, unaugmented rows for a dataset. Image rows pass through the
  // same single-precision buffers as augmented ones.
  RowMatrix clean_inputs(const Dataset& ds) const {
    if (!ds.image) return ds.inputs;
    RowMatrix out(ds.inputs.rows(), ds.inputs.cols());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      auto img = ds.image_at(i);
      policy_.normalization.apply(img);
      for (std::size_t p = 0; p < img.size(); ++p)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = img.data[p];
    }
    return out;
  }

  static double error_rate(const RowMatrix& probs, const std::vector<int>& truth) {
    if (truth.empty()) throw InputError("error rate of an empty set");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += argmax_row(probs.row(static_cast<Eigen::Index>(i))) != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
  }

  // One augmented replica of training row i.
  RowMatrix augmented_row(std::size_t i, bool labelled, Rng& rng) const {
    if (!data_.train.image) return clean_train_.row(static_cast<Eigen::Index>(i));
    const auto img = data_.train.image_at(i);
    const auto aug = labelled ? labelled_pipeline(img, rng, policy_) : unlabelled_pipeline(img, rng, policy_);
    RowMatrix row(1, static_cast<Eigen::Index>(aug.size()));
    for (std::size_t p = 0; p < aug.size(); ++p) row(0, static_cast<Eigen::Index>(p)) = aug.data[p];
    return row;
  }

 private:
  static constexpr std::uint64_t kStreamInit = 1;
  static constexpr std::uint64_t kStreamInitOrder = 2;
  static constexpr std::uint64_t kStreamInitAug = 3;
  static constexpr std::uint64_t kStreamInitMix = 4;
  static constexpr std::uint64_t kStreamSslAug = 5;
  static constexpr std::uint64_t kStreamSslMix = 6;
  static constexpr std::uint64_t kStreamEpochOrder = 7;
  static constexpr std::uint64_t kStreamCycler = 8;

  // Endless pass over labelled positions, reshuffled at every wrap.
  class LabelledCycler {
   public:
    LabelledCycler(std::size_t n, std::uint64_t seed) : order_(n), seed_(seed) { refill(); }
    std::size_t next() {
      if (pos_ == order_.size()) refill();
      return order_[pos_++];
    }

   private:
    void refill() {
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      Rng rng = make_rng({seed_, kStreamCycler, round_++});
      shuffle(order_.begin(), order_.end(), rng);
      pos_ = 0;
    }
    std::vector<std::size_t> order_;
    std::uint64_t seed_;
    std::uint64_t round_ = 0;
    std::size_t pos_ = 0;
  };

  SgdConfig sgd_config() const { return SgdConfig{cfg_.lr, cfg_.momentum, cfg_.weight_decay, cfg_.lr_horizon, true}; }

  // n_a augmented replicas per sample, replicas of a sample adjacent. Each
  // replica draws from its own stream, so worker count does not matter.
  std::pair<RowMatrix, RowMatrix> build_batch(const std::vector<std::size_t>& idx, const std::vector<int>& labels,
                                              const std::vector<bool>& is_labelled, std::uint64_t stream,
                                              std::uint64_t step) const {
    const std::size_t na = cfg_.n_a;
    const auto rows = static_cast<Eigen::Index>(idx.size() * na);
    RowMatrix x(rows, static_cast<Eigen::Index>(data_.train.dim()));
    parallel_for(idx.size() * na, cfg_.threads, [&](std::size_t r) {
      const std::size_t s = r / na;
      Rng rng = make_rng({cfg_.seed, stream, step, idx[s], r % na});
      x.row(static_cast<Eigen::Index>(r)) = augmented_row(idx[s], is_labelled[s], rng);
    });
    std::vector<int> replica_labels(idx.size() * na);
    for (std::size_t r = 0; r < replica_labels.size(); ++r) replica_labels[r] = labels[r / na];
    return {std::move(x), one_hot(replica_labels, data_.train.classes)};
  }

  double optimize(const RowMatrix& x, const RowMatrix& t, const SgdConfig& sgd, SgdState& state, Rng rng,
                  const std::string& where) {
    const auto mixed = mixup_within(x, t, MixUpConfig{cfg_.alpha, cfg_.mixup}, rng);
    Gradients grads;
    const double loss = model_.loss_and_gradients(mixed.inputs, mixed.targets, grads);
    if (!std::isfinite(loss))
      abort_run("non-finite loss at " + where + " (lambda = " + std::to_string(mixed.lambda) + ")", state);
    try {
      sgd_step(model_, grads, sgd, state);
    } catch (const NumericalError& e) {
      abort_run(std::string(e.what()) + " at " + where, state);
    }
    return loss;
  }

  [[noreturn]] void abort_run(std::string msg, const SgdState& state) const {
    if (!dump_path_.empty()) {
      write_checkpoint(dump_path_, model_, state);
      msg += "; state written to " + dump_path_;
    }
    throw NumericalError(msg);
  }

  RunConfig cfg_;
  TrainData data_;
  AugmentPolicy policy_;
  Mlp model_;
  RowMatrix clean_train_;
  RowMatrix clean_test_;
  SgdState sgd_state_;
  PseudoLabelState pseudo_;
  std::size_t epoch_ = 0;
  TrainCounters counters_;
  std::string dump_path_;
};

}  // namespace gssl
