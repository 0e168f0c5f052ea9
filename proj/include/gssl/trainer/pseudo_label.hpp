#pragma once

#include <limits>
#include <vector>

#include "gssl/align/alignment.hpp"
#include "gssl/graph/affinity.hpp"
#include "gssl/graph/labels.hpp"
#include "gssl/graph/propagation.hpp"
#include "gssl/trainer/config.hpp"

namespace gssl {

struct PseudoLabelOutcome {
  std::vector<int> labels;  // one per sample; labelled rows carry ground truth
  PredictionMatrix scores;  // F after propagation (and alignment when enabled)
  std::size_t degenerate_rows = 0;
  bool converged = true;
  std::vector<PriorDistribution> align_trace;
};

inline PropagationConfig propagation_config(const RunConfig& cfg) {
  PropagationConfig p;
  p.k = cfg.k;
  p.mu = cfg.mu;
  p.cg_tol = cfg.cg_tol;
  p.cg_max_iter = cfg.cg_max_iter;
  p.degree_epsilon = cfg.degree_epsilon;
  return p;
}

inline AlignConfig align_config(const RunConfig& cfg) {
  AlignConfig a;
  a.max_iter = cfg.align_iterations;
  a.clip_lo = cfg.align_clip_lo;
  a.clip_hi = cfg.align_clip_hi;
  return a;
}

// kNN graph over the embeddings -> normalize -> propagate -> align -> argmax.
inline PseudoLabelOutcome graph_pseudo_labels(const RowMatrix& embeddings, const LabelSeed& seed, const RunConfig& cfg) {
  const EmbeddingMatrix v(embeddings);
  KnnOptions opts;
  opts.similarity = cfg.similarity == "gaussian" ? Similarity::kGaussian : Similarity::kInnerProduct;
  opts.threads = cfg.threads;
  const auto pcfg = propagation_config(cfg);
  const auto w = normalize_affinity(build_knn_affinity(v, cfg.k, opts), cfg.degree_epsilon);
  auto prop = solve_propagation(w, build_label_matrix(seed), pcfg, cfg.threads);
  PseudoLabelOutcome out;
  out.converged = prop.converged();
  out.scores = std::move(prop.scores);
  if (cfg.align && !seed.unlabelled.empty()) {
    auto aligned = smooth_align(out.scores, parse_prior(cfg.prior, seed.num_classes), seed.labelled, seed.unlabelled,
                                align_config(cfg));
    out.scores = std::move(aligned.scores);
    out.align_trace = std::move(aligned.trace);
  }
  auto pl = extract_pseudo_labels(out.scores, seed);
  out.labels = std::move(pl.labels);
  out.degenerate_rows = pl.degenerate_rows;
  return out;
}

// argmax of the network's class probabilities on unlabelled rows.
inline PseudoLabelOutcome network_pseudo_labels(const RowMatrix& probs, const LabelSeed& seed) {
  PseudoLabelOutcome out;
  out.scores = probs;
  auto pl = extract_pseudo_labels(probs, seed);
  out.labels = std::move(pl.labels);
  return out;
}

// Fraction of `indices` whose label matches the truth; NaN for an empty set.
inline double label_accuracy(const std::vector<int>& labels, const std::vector<int>& truth,
                             const std::vector<std::size_t>& indices) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t hits = 0;
  for (std::size_t i : indices) hits += labels[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

}  // namespace gssl
