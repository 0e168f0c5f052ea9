#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gssl/augment/pipeline.hpp"
#include "gssl/backbone/loss.hpp"
#include "gssl/backbone/mlp.hpp"
#include "gssl/core/parallel.hpp"
#include "gssl/data/dataset.hpp"
#include "gssl/graph/labels.hpp"

namespace gssl {

// Fraction of rows whose argmax differs from the label.
inline double top1_error(const RowMatrix& probs, const std::vector<int>& labels) {
  if (labels.empty()) throw InputError("top1_error: empty dataset");
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) throw InputError("top1_error: row count mismatch");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += argmax_row(probs.row(static_cast<Eigen::Index>(i))) != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

inline double top1_error(const Mlp& model, const RowMatrix& inputs, const std::vector<int>& labels) {
  if (labels.empty()) throw InputError("top1_error: empty dataset");
  return top1_error(model.forward(inputs).probs, labels);
}

// Maps a raw image to the network input for one random draw.
using Augmentation = std::function<ImageBuffer(const ImageBuffer&, Rng&)>;

inline Augmentation identity_augmentation(Normalization norm = {}) {
  return [norm](const ImageBuffer& img, Rng&) {
    ImageBuffer out = img;
    norm.apply(out);
    return out;
  };
}

inline Augmentation pipeline_augmentation(AugmentPolicy policy, bool unlabelled = true) {
  return [policy, unlabelled](const ImageBuffer& img, Rng& rng) {
    return unlabelled ? unlabelled_pipeline(img, rng, policy) : labelled_pipeline(img, rng, policy);
  };
}

inline Augmentation fixed_transform(TransformSpec spec, Normalization norm = {}) {
  return [spec, norm](const ImageBuffer& img, Rng&) {
    ImageBuffer out = apply_transform(img, spec);
    norm.apply(out);
    return out;
  };
}

inline RowMatrix image_batch(const std::vector<ImageBuffer>& images) { return image_rows(images); }

struct InvarianceOptions {
  std::size_t trials = 5;  // augmentation draws per sample
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string description = "augmentation";
};

struct InvarianceReport {
  double v_z = 0.0;
  double augmented_accuracy = 0.0;
  double clean_accuracy = 0.0;
  std::string dataset_tag;
  std::string description;
  std::size_t trials = 0;
};

// V_Z = accuracy on u(x) / accuracy on x. The numerator averages `trials`
// independent draws of u per sample; draw t of sample i uses its own stream.
inline InvarianceReport augmentation_invariance(const Mlp& model, const Dataset& ds, const Augmentation& u,
                                                const Normalization& norm, const InvarianceOptions& opts = {}) {
  if (ds.size() == 0) throw InputError("augmentation_invariance: empty dataset");
  if (!ds.image) throw InputError("augmentation_invariance needs an image dataset");
  if (opts.trials == 0) throw InvalidConfig("augmentation_invariance needs at least one trial");
  const std::size_t n = ds.size();
  std::vector<ImageBuffer> clean(n);
  for (std::size_t i = 0; i < n; ++i) {
    clean[i] = ds.image_at(i);
    norm.apply(clean[i]);
  }
  InvarianceReport rep;
  rep.dataset_tag = ds.tag;
  rep.description = opts.description;
  rep.trials = opts.trials;
  rep.clean_accuracy = 1.0 - top1_error(model, image_batch(clean), ds.labels);
  if (rep.clean_accuracy <= 0.0) throw InputError("augmentation_invariance: clean accuracy is zero, ratio undefined");

  double acc_sum = 0.0;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    std::vector<ImageBuffer> aug(n);
    parallel_for(n, opts.threads, [&](std::size_t i) {
      Rng rng = make_rng({opts.seed, 0x696E76ULL, t, i});
      aug[i] = u(ds.image_at(i), rng);
    });
    acc_sum += 1.0 - top1_error(model, image_batch(aug), ds.labels);
  }
  rep.augmented_accuracy = acc_sum / static_cast<double>(opts.trials);
  rep.v_z = rep.augmented_accuracy / rep.clean_accuracy;
  return rep;
}

struct VarianceRow {
  std::size_t n_a = 0;
  double variance = 0.0;      // mean over samples of Var[(1/n_a) sum_j loss_j]
  double standard_error = 0.0;
  double mean_loss = 0.0;
};

// For each n_a: the sample variance, over `draws` repetitions, of the
// per-sample loss averaged over n_a augmented replicas, averaged over samples.
inline std::vector<VarianceRow> multisample_variance_study(const Mlp& model, const Dataset& ds, const Augmentation& u,
                                                           const std::vector<std::size_t>& n_a_values,
                                                           std::size_t draws, std::uint64_t seed = 0,
                                                           std::size_t threads = 1) {
  if (!ds.image) throw InputError("variance study needs an image dataset");
  if (draws < 2) throw InvalidConfig("variance study needs at least 2 draws");
  std::vector<VarianceRow> out;
  for (std::size_t na : n_a_values) {
    if (na == 0) throw InvalidConfig("n_a must be positive");
    VarianceRow row;
    row.n_a = na;
    std::vector<double> per_sample_var(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto img = ds.image_at(i);
      std::vector<ImageBuffer> aug(draws * na);
      parallel_for(aug.size(), threads, [&](std::size_t r) {
        Rng rng = make_rng({seed, 0x766172ULL, na, i, r});
        aug[r] = u(img, rng);
      });
      const auto logits = model.forward(image_batch(aug)).logits;
      const RowMatrix targets = one_hot(std::vector<int>(aug.size(), ds.labels[i]), ds.classes);
      const Eigen::VectorXd losses = cross_entropy_rows(logits, targets);
      std::vector<double> means(draws, 0.0);
      for (std::size_t d = 0; d < draws; ++d) means[d] = losses.segment(static_cast<Eigen::Index>(d * na), static_cast<Eigen::Index>(na)).mean();
      // Shifted by the first draw so identical draws give exactly zero.
      double shift_sum = 0.0, shift_sq = 0.0;
      for (double m : means) {
        const double d = m - means[0];
        shift_sum += d;
        shift_sq += d * d;
      }
      const double n = static_cast<double>(draws);
      per_sample_var[i] = std::max(0.0, (shift_sq - shift_sum * shift_sum / n) / (n - 1.0));
      row.mean_loss += means[0] + shift_sum / n;
    }
    double total = 0.0, sq = 0.0;
    for (double v : per_sample_var) total += v, sq += v * v;
    const double k = static_cast<double>(per_sample_var.size());
    row.variance = total / k;
    row.mean_loss /= k;
    row.standard_error = k > 1 ? std::sqrt(std::max(0.0, sq / k - row.variance * row.variance) / (k - 1)) : 0.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace gssl
