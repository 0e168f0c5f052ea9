#pragma once

#include <numeric>
#include <vector>

#include "gssl/core/error.hpp"
#include "gssl/core/random.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

struct MixUpConfig {
  double alpha = 1.0;
  bool enabled = true;

  void validate() const {
    if (enabled && !(alpha > 0.0)) throw InvalidConfig("mixup alpha must be positive");
  }
};

struct MixedBatch {
  RowMatrix inputs;
  RowMatrix targets;
  double lambda = 1.0;
  std::vector<std::size_t> partner;  // row of batch_b mixed into each row
};

inline double sample_mixup_lambda(Rng& rng, double alpha) { return beta(rng, alpha, alpha); }

// lambda * a + (1 - lambda) * b for inputs and targets alike.
inline MixedBatch mixup(const RowMatrix& xa, const RowMatrix& ya, const RowMatrix& xb, const RowMatrix& yb,
                        double lambda) {
  if (xa.rows() != xb.rows() || xa.cols() != xb.cols() || ya.rows() != yb.rows() || ya.cols() != yb.cols() ||
      xa.rows() != ya.rows())
    throw InputError("mixup: batch shapes differ");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("mixup: lambda outside [0, 1]");
  MixedBatch out;
  out.lambda = lambda;
  if (lambda == 1.0) {
    out.inputs = xa;
    out.targets = ya;
  } else if (lambda == 0.0) {
    out.inputs = xb;
    out.targets = yb;
  } else {
    out.inputs = lambda * xa + (1.0 - lambda) * xb;
    out.targets = lambda * ya + (1.0 - lambda) * yb;
  }
  out.partner.resize(static_cast<std::size_t>(xa.rows()));
  std::iota(out.partner.begin(), out.partner.end(), std::size_t{0});
  return out;
}

// Mixes a batch with a random permutation of itself, one lambda per batch.
inline MixedBatch mixup_within(const RowMatrix& x, const RowMatrix& y, const MixUpConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!cfg.enabled) return mixup(x, y, x, y, 1.0);
  const double lambda = sample_mixup_lambda(rng, cfg.alpha);
  std::vector<std::size_t> perm(static_cast<std::size_t>(x.rows()));
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle(perm.begin(), perm.end(), rng);
  RowMatrix xb(x.rows(), x.cols()), yb(y.rows(), y.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[i]));
    yb.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(perm[i]));
  }
  auto out = mixup(x, y, xb, yb, lambda);
  out.partner = std::move(perm);
  return out;
}

}  // namespace gssl
