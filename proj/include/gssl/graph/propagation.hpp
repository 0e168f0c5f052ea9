#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gssl/core/error.hpp"
#include "gssl/core/parallel.hpp"
#include "gssl/graph/affinity.hpp"
#include "gssl/graph/conjugate_gradient.hpp"
#include "gssl/graph/labels.hpp"

namespace gssl {

struct PropagationConfig {
  std::size_t k = 50;
  double mu = 0.01;
  double cg_tol = 1e-6;
  std::size_t cg_max_iter = 1000;
  double degree_epsilon = 1e-12;

  // gamma (1 + mu) = 1.
  double gamma() const { return 1.0 / (1.0 + mu); }

  void validate() const {
    if (k < 1) throw InvalidConfig("k must be at least 1");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidConfig("mu must be positive and finite");
    if (!(cg_tol > 0.0)) throw InvalidConfig("cg_tol must be positive");
    if (cg_max_iter < 1) throw InvalidConfig("cg_max_iter must be at least 1");
    if (degree_epsilon < 0.0) throw InvalidConfig("degree_epsilon must be nonnegative");
  }
};

struct PropagationResult {
  PredictionMatrix scores;
  std::vector<CgReport> columns;

  bool converged() const {
    return std::all_of(columns.begin(), columns.end(), [](const CgReport& r) { return r.converged; });
  }
};

// Solves (I - gamma A) F = Y column by column with conjugate gradient,
// warm-started at Y. A must be the normalized affinity. Columns are
// independent, so `threads` does not change the result.
inline PropagationResult solve_propagation(const SparseAffinity& a, const PredictionMatrix& y,
                                           const PropagationConfig& cfg, std::size_t threads = 1) {
  cfg.validate();
  if (!a.normalized) throw InputError("propagation requires a normalized affinity");
  if (static_cast<std::size_t>(y.rows()) != a.n) throw InputError("label matrix rows do not match graph size");
  const double gamma = cfg.gamma();
  const auto classes = static_cast<std::size_t>(y.cols());

  PropagationResult result;
  result.scores = PredictionMatrix::Zero(y.rows(), y.cols());
  result.columns.resize(classes);
  std::vector<Eigen::VectorXd> solutions(classes);

  parallel_for(classes, threads, [&](std::size_t c) {
    const Eigen::VectorXd b = y.col(static_cast<Eigen::Index>(c));
    Eigen::VectorXd x = b;
    if (b.squaredNorm() == 0.0) {
      result.columns[c].converged = true;
      solutions[c] = Eigen::VectorXd::Zero(b.size());
      return;
    }
    Eigen::VectorXd wx(b.size());
    const auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
      a.multiply(in, wx);
      out = in - gamma * wx;
    };
    result.columns[c] = conjugate_gradient(apply, b, x, cfg.cg_tol, cfg.cg_max_iter);
    solutions[c] = std::move(x);
  });
  for (std::size_t c = 0; c < classes; ++c) result.scores.col(static_cast<Eigen::Index>(c)) = solutions[c];
  return result;
}

// Q(F) = 1/2 sum_ij W_ij |F_i / sqrt(D_ii) - F_j / sqrt(D_jj)|^2 + mu/2 sum_i |F_i - Y_i|^2,
// summed over stored edges. W and D are the raw weights and degrees; for a
// normalized affinity they are recovered from the retained degrees.
inline double laplacian_cost(const SparseAffinity& a, const PredictionMatrix& f, const PredictionMatrix& y,
                             double mu) {
  if (static_cast<std::size_t>(f.rows()) != a.n || f.rows() != y.rows() || f.cols() != y.cols())
    throw InputError("laplacian_cost: dimension mismatch");

  std::vector<double> degree(a.n, 0.0);
  if (a.normalized) {
    if (a.degrees.size() != a.n) throw NumericalError("normalized affinity lost its degree vector");
    degree = a.degrees;
  } else {
    for (std::size_t i = 0; i < a.n; ++i)
      for (double w : a.row_values(i)) degree[i] += w;
  }

  double smooth = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
      const std::size_t j = a.col_indices[p];
      double w = a.values[p];
      if (a.normalized)
        w *= std::sqrt((degree[i] + a.degree_epsilon) * (degree[j] + a.degree_epsilon));
      if (w == 0.0) continue;
      if (degree[i] <= 0.0 || degree[j] <= 0.0)
        throw NumericalError("node with zero degree has nonzero incident weight (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      const auto diff = f.row(i) / std::sqrt(degree[i]) - f.row(j) / std::sqrt(degree[j]);
      smooth += w * diff.squaredNorm();
    }
  }
  const double fidelity = (f - y).squaredNorm();
  return 0.5 * smooth + 0.5 * mu * fidelity;
}

// Factor that maps the solution of (I - gamma A) F = Y onto the stationary
// point of laplacian_cost: F* = (1 - gamma) F. Positive, so argmax is unchanged.
inline double energy_scale(const PropagationConfig& cfg) { return 1.0 - cfg.gamma(); }

}  // namespace gssl
