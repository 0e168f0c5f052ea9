#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "gssl/core/error.hpp"
#include "gssl/core/parallel.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

// Symmetric nonnegative sparse weights in compressed-row form. After
// normalize_affinity() the values hold D^{-1/2} W D^{-1/2}; the raw degrees
// and the epsilon floor are kept so the raw weights can be recovered.
struct SparseAffinity {
  std::size_t n = 0;
  std::vector<std::size_t> row_offsets;  // n + 1 entries
  std::vector<std::size_t> col_indices;
  std::vector<double> values;
  bool normalized = false;
  std::vector<double> degrees;  // raw row sums, filled on normalization
  double degree_epsilon = 0.0;

  std::size_t nnz() const { return values.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_indices.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
  }

  // Stored value at (i, j), or 0 when the entry is structurally absent.
  double at(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values[row_offsets[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  bool contains(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    return std::binary_search(cols.begin(), cols.end(), j);
  }

  // y = A x
  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) acc += values[p] * x[col_indices[p]];
      y[i] = acc;
    }
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p) out(i, col_indices[p]) = values[p];
    return out;
  }

  // Builds CSR from per-row sorted adjacency lists.
  static SparseAffinity from_rows(const std::vector<std::vector<std::pair<std::size_t, double>>>& rows) {
    SparseAffinity a;
    a.n = rows.size();
    a.row_offsets.assign(a.n + 1, 0);
    for (std::size_t i = 0; i < a.n; ++i) a.row_offsets[i + 1] = a.row_offsets[i] + rows[i].size();
    a.col_indices.reserve(a.row_offsets.back());
    a.values.reserve(a.row_offsets.back());
    for (const auto& row : rows) {
      for (const auto& [j, w] : row) {
        a.col_indices.push_back(j);
        a.values.push_back(w);
      }
    }
    return a;
  }
};

enum class Similarity {
  kInnerProduct,  // w = max(<v_i, v_j>, 0), neighbours by largest inner product
  kGaussian,      // w = exp(-|v_i - v_j|^2 / sigma^2), neighbours by smallest distance
};

struct KnnOptions {
  Similarity similarity = Similarity::kInnerProduct;
  double bandwidth = 0.0;  // Gaussian sigma; <= 0 selects the mean k-th neighbour distance
  std::size_t block_rows = 256;
  std::size_t threads = 1;
};

namespace detail {

inline double pair_dot(const EmbeddingMatrix& v, std::size_t i, std::size_t j) {
  // Fixed operand order so W_ij and W_ji are bitwise equal.
  if (i > j) std::swap(i, j);
  double acc = 0.0;
  for (std::size_t c = 0; c < v.dim(); ++c) acc += v.data()(i, c) * v.data()(j, c);
  return acc;
}

inline double pair_sq_distance(const EmbeddingMatrix& v, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  double acc = 0.0;
  for (std::size_t c = 0; c < v.dim(); ++c) {
    const double d = v.data()(i, c) - v.data()(j, c);
    acc += d * d;
  }
  return acc;
}

}  // namespace detail

// Exact k-nearest-neighbour lists, self excluded. Ties go to the lower index.
inline std::vector<std::vector<std::size_t>> knn_lists(const EmbeddingMatrix& v, std::size_t k,
                                                       const KnnOptions& opts = {}) {
  const std::size_t n = v.size();
  if (k == 0) throw InvalidConfig("k must be at least 1");
  if (k >= n) throw InvalidConfig("k = " + std::to_string(k) + " must be smaller than n = " + std::to_string(n));
  std::vector<std::vector<std::size_t>> neighbours(n);
  const RowMatrix& data = v.data();
  const Eigen::VectorXd sq_norms = data.rowwise().squaredNorm();
  const std::size_t block = std::max<std::size_t>(opts.block_rows, 1);
  const std::size_t blocks = (n + block - 1) / block;

  parallel_for(blocks, opts.threads, [&](std::size_t b) {
    const std::size_t begin = b * block;
    const std::size_t rows = std::min(block, n - begin);
    // Scores: larger is closer.
    Eigen::MatrixXd scores = data.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(rows)) *
                             data.transpose();
    if (opts.similarity == Similarity::kGaussian) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < n; ++j)
          scores(r, j) = 2.0 * scores(r, j) - sq_norms[begin + r] - sq_norms[j];
    }
    std::vector<std::size_t> order(n - 1);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = begin + r;
      std::size_t w = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) order[w++] = j;
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](std::size_t a, std::size_t c) {
                          const double sa = scores(r, a), sc = scores(r, c);
                          return sa > sc || (sa == sc && a < c);
                        });
      neighbours[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    }
  });
  return neighbours;
}

// Sparse symmetric affinity: entry (i, j) is present iff i is among the k
// nearest neighbours of j or vice versa. Inner-product weights are clamped at
// zero; stored zeros are kept so the structure reflects the neighbour rule.
inline SparseAffinity build_knn_affinity(const EmbeddingMatrix& v, std::size_t k, const KnnOptions& opts = {}) {
  const std::size_t n = v.size();
  const auto neighbours = knn_lists(v, k, opts);

  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbours[i]) {
      adjacency[i].push_back(j);
      adjacency[j].push_back(i);
    }
  }
  for (auto& row : adjacency) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  double sigma_sq = 1.0;
  if (opts.similarity == Similarity::kGaussian) {
    double sigma = opts.bandwidth;
    if (sigma <= 0.0) {
      // k-th neighbour is the last entry of each sorted list.
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += std::sqrt(detail::pair_sq_distance(v, i, neighbours[i].back()));
      sigma = total / static_cast<double>(n);
      if (sigma <= 0.0) sigma = 1.0;
    }
    sigma_sq = sigma * sigma;
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].reserve(adjacency[i].size());
    for (std::size_t j : adjacency[i]) {
      const double w = opts.similarity == Similarity::kInnerProduct
                           ? std::max(detail::pair_dot(v, i, j), 0.0)
                           : std::exp(-detail::pair_sq_distance(v, i, j) / sigma_sq);
      rows[i].emplace_back(j, w);
    }
  }
  return SparseAffinity::from_rows(rows);
}

// D^{-1/2} W D^{-1/2} with D = diag(W 1) + epsilon.
inline SparseAffinity normalize_affinity(const SparseAffinity& w, double degree_epsilon = 1e-12) {
  if (w.normalized) throw InputError("affinity is already normalized");
  if (degree_epsilon < 0.0) throw InvalidConfig("degree_epsilon must be nonnegative");
  SparseAffinity out = w;
  out.degrees.assign(w.n, 0.0);
  for (std::size_t i = 0; i < w.n; ++i) {
    for (double x : w.row_values(i)) {
      if (x < 0.0 || !std::isfinite(x)) throw InputError("affinity weights must be finite and nonnegative");
      out.degrees[i] += x;
    }
  }
  std::vector<double> inv_sqrt(w.n, 0.0);
  for (std::size_t i = 0; i < w.n; ++i) {
    const double d = out.degrees[i] + degree_epsilon;
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (std::size_t i = 0; i < w.n; ++i)
    for (std::size_t p = w.row_offsets[i]; p < w.row_offsets[i + 1]; ++p)
    {
      const std::size_t j = w.col_indices[p];
      // Same operand order for (i, j) and (j, i) keeps the result symmetric.
      out.values[p] = w.values[p] * (inv_sqrt[std::min(i, j)] * inv_sqrt[std::max(i, j)]);
    }
  out.normalized = true;
  out.degree_epsilon = degree_epsilon;
  return out;
}

// Debug export: one line per stored entry, both directions.
inline void write_edge_list(std::ostream& out, const SparseAffinity& a) {
  out << "i,j,weight\n";
  out.precision(17);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
      out << i << ',' << a.col_indices[p] << ',' << a.values[p] << '\n';
}

}  // namespace gssl
