#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "gssl/core/error.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

// Dense n x C score matrix F; also used for the seed label matrix Y.
using PredictionMatrix = RowMatrix;

// Partition of {0..n-1} into labelled and unlabelled indices, with a class
// id in [0, num_classes) for every labelled index.
struct LabelSeed {
  std::size_t n = 0;
  std::size_t num_classes = 0;
  std::vector<std::size_t> labelled;
  std::vector<std::size_t> unlabelled;
  std::vector<int> labels;  // parallel to `labelled`

  // Unlabelled indices are the ascending complement of `labelled`.
  static LabelSeed make(std::size_t n, std::size_t num_classes, std::vector<std::size_t> labelled,
                        std::vector<int> labels) {
    LabelSeed s;
    s.n = n;
    s.num_classes = num_classes;
    s.labelled = std::move(labelled);
    s.labels = std::move(labels);
    std::vector<char> seen(n, 0);
    for (std::size_t i : s.labelled) {
      if (i < n) seen[i] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[i]) s.unlabelled.push_back(i);
    s.validate();
    return s;
  }

  void validate() const {
    if (num_classes == 0) throw InputError("label seed needs at least one class");
    if (labels.size() != labelled.size()) throw InputError("label seed: labels and labelled indices differ in length");
    std::vector<char> seen(n, 0);
    for (std::size_t idx = 0; idx < labelled.size(); ++idx) {
      const std::size_t i = labelled[idx];
      if (i >= n) throw InputError("labelled index " + std::to_string(i) + " out of range");
      if (seen[i]) throw InputError("index " + std::to_string(i) + " listed twice");
      seen[i] = 1;
      const int y = labels[idx];
      if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
        throw InputError("label " + std::to_string(y) + " at index " + std::to_string(i) + " outside [0, " +
                         std::to_string(num_classes) + ")");
    }
    for (std::size_t i : unlabelled) {
      if (i >= n) throw InputError("unlabelled index " + std::to_string(i) + " out of range");
      if (seen[i]) throw InputError("index " + std::to_string(i) + " is both labelled and unlabelled or repeated");
      seen[i] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw InputError("labelled and unlabelled indices do not cover every sample");
  }
};

// Y_ij = 1 iff sample i is labelled with class j.
inline PredictionMatrix build_label_matrix(const LabelSeed& seed) {
  seed.validate();
  PredictionMatrix y = PredictionMatrix::Zero(static_cast<Eigen::Index>(seed.n), static_cast<Eigen::Index>(seed.num_classes));
  for (std::size_t idx = 0; idx < seed.labelled.size(); ++idx) y(seed.labelled[idx], seed.labels[idx]) = 1.0;
  return y;
}

// First index of the row maximum.
template <typename Row>
int argmax_row(const Row& row) {
  int best = 0;
  for (Eigen::Index c = 1; c < row.size(); ++c)
    if (row[c] > row[best]) best = static_cast<int>(c);
  return best;
}

struct PseudoLabels {
  std::vector<int> labels;            // one per sample
  std::vector<double> max_scores;     // row maximum of F
  std::size_t degenerate_rows = 0;    // unlabelled all-zero rows assigned class 0
};

// argmax_j F_ij for unlabelled rows; labelled rows keep their ground truth.
inline PseudoLabels extract_pseudo_labels(const PredictionMatrix& f, const LabelSeed& seed) {
  if (static_cast<std::size_t>(f.rows()) != seed.n || static_cast<std::size_t>(f.cols()) != seed.num_classes)
    throw InputError("prediction matrix shape does not match the label seed");
  if (!f.allFinite()) throw InputError("prediction matrix contains non-finite values");
  PseudoLabels out;
  out.labels.resize(seed.n);
  out.max_scores.resize(seed.n);
  for (std::size_t i = 0; i < seed.n; ++i) {
    const auto row = f.row(static_cast<Eigen::Index>(i));
    out.labels[i] = argmax_row(row);
    out.max_scores[i] = row.maxCoeff();
  }
  for (std::size_t i : seed.unlabelled)
    if ((f.row(static_cast<Eigen::Index>(i)).array() == 0.0).all()) ++out.degenerate_rows;
  for (std::size_t idx = 0; idx < seed.labelled.size(); ++idx) out.labels[seed.labelled[idx]] = seed.labels[idx];
  return out;
}

}  // namespace gssl
