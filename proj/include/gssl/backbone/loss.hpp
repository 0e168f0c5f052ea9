#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "gssl/core/error.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

// Row-wise softmax, shifted by the row maximum.
inline RowMatrix softmax(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

inline RowMatrix log_softmax(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

namespace detail {

inline void check_targets(Eigen::Index rows, Eigen::Index cols, const RowMatrix& targets) {
  if (targets.rows() != rows || targets.cols() != cols) throw InputError("cross_entropy: target shape mismatch");
  if (rows == 0) throw InputError("cross_entropy: empty batch");
}

}  // namespace detail

// Mean over rows of -sum_c t_c log p_c. Zero targets contribute nothing, so
// vanishing probabilities on other classes never produce NaN.
inline double cross_entropy(const RowMatrix& probs, const RowMatrix& targets) {
  detail::check_targets(probs.rows(), probs.cols(), targets);
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index c = 0; c < probs.cols(); ++c)
      if (targets(i, c) != 0.0)
        total -= targets(i, c) * std::log(std::max(probs(i, c), std::numeric_limits<double>::min()));
  return total / static_cast<double>(probs.rows());
}

// Same loss evaluated through log-sum-exp on the logits.
inline double cross_entropy_from_logits(const RowMatrix& logits, const RowMatrix& targets) {
  detail::check_targets(logits.rows(), logits.cols(), targets);
  const RowMatrix lp = log_softmax(logits);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lp.rows(); ++i)
    for (Eigen::Index c = 0; c < lp.cols(); ++c)
      if (targets(i, c) != 0.0) total -= targets(i, c) * lp(i, c);
  return total / static_cast<double>(lp.rows());
}

// Per-row loss, used for variance studies.
inline Eigen::VectorXd cross_entropy_rows(const RowMatrix& logits, const RowMatrix& targets) {
  detail::check_targets(logits.rows(), logits.cols(), targets);
  const RowMatrix lp = log_softmax(logits);
  Eigen::VectorXd out(lp.rows());
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < lp.cols(); ++c)
      if (targets(i, c) != 0.0) s -= targets(i, c) * lp(i, c);
    out[i] = s;
  }
  return out;
}

inline RowMatrix one_hot(const std::vector<int>& labels, std::size_t classes) {
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw InputError("label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

}  // namespace gssl
