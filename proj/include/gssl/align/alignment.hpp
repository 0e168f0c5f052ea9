#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gssl/core/error.hpp"
#include "gssl/graph/labels.hpp"

namespace gssl {

// Class prior D: nonnegative, sums to one.
class PriorDistribution {
 public:
  explicit PriorDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InputError("prior distribution needs at least one class");
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("prior probabilities must be finite and nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("prior probabilities sum to " + std::to_string(total) + ", not 1");
  }

  static PriorDistribution uniform(std::size_t classes) {
    return PriorDistribution(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t c) const { return probs_[c]; }
  const std::vector<double>& values() const { return probs_; }

  double l1_distance(const PriorDistribution& other) const {
    double d = 0.0;
    for (std::size_t c = 0; c < probs_.size(); ++c) d += std::abs(probs_[c] - other.probs_[c]);
    return d;
  }

 private:
  std::vector<double> probs_;
};

struct AlignConfig {
  std::size_t max_iter = 10;
  double clip_lo = 0.99;
  double clip_hi = 1.01;
  double negativity_floor = 0.0;

  void validate() const {
    if (max_iter < 1) throw InvalidConfig("alignment needs at least one iteration");
    if (!(clip_lo > 0.0 && clip_lo <= 1.0 && clip_hi >= 1.0)) throw InvalidConfig("alignment clip bounds must satisfy 0 < lo <= 1 <= hi");
    if (negativity_floor < 0.0) throw InvalidConfig("negativity_floor must be nonnegative");
  }
};

// Fraction of rows in U whose argmax is each class.
inline PriorDistribution empirical_class_distribution(const PredictionMatrix& f, const std::vector<std::size_t>& u) {
  if (u.empty()) throw InputError("empirical class distribution needs a nonempty index set");
  std::vector<std::size_t> counts(static_cast<std::size_t>(f.cols()), 0);
  for (std::size_t i : u) ++counts[static_cast<std::size_t>(argmax_row(f.row(static_cast<Eigen::Index>(i))))];
  std::vector<double> probs(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) probs[c] = static_cast<double>(counts[c]) / static_cast<double>(u.size());
  return PriorDistribution(std::move(probs));
}

struct AlignResult {
  PredictionMatrix scores;
  // D_U before the first iteration and after each of the T iterations.
  std::vector<PriorDistribution> trace;
  std::size_t uniform_rows = 0;  // rows with nonpositive mass replaced by uniform
};

namespace detail {

// Rows already summing to one within rounding are left untouched so that the
// fixed point of the alignment map is exact.
inline std::size_t normalize_rows(PredictionMatrix& f) {
  constexpr double kSlack = 1e-14;
  std::size_t replaced = 0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double s = f.row(i).sum();
    if (!(s > 0.0)) {
      f.row(i).setConstant(1.0 / static_cast<double>(f.cols()));
      ++replaced;
    } else if (std::abs(s - 1.0) > kSlack) {
      f.row(i) /= s;
    }
  }
  return replaced;
}

}  // namespace detail

// Smooth distribution alignment. Each iteration rescales the unlabelled rows'
// columns by R = D / D_U clipped to [clip_lo, clip_hi] and renormalizes every
// row. Labelled rows are only renormalized.
inline AlignResult smooth_align(const PredictionMatrix& f, const PriorDistribution& prior,
                                const std::vector<std::size_t>& labelled, const std::vector<std::size_t>& unlabelled,
                                const AlignConfig& cfg) {
  cfg.validate();
  (void)labelled;  // labelled rows are implicitly every row outside `unlabelled`
  if (static_cast<std::size_t>(f.cols()) != prior.size()) throw InputError("prior size does not match class count");
  if (!f.allFinite()) throw InputError("prediction matrix contains non-finite values");
  const auto classes = static_cast<std::size_t>(f.cols());

  AlignResult out;
  out.scores = f.cwiseMax(cfg.negativity_floor);
  out.uniform_rows += detail::normalize_rows(out.scores);
  out.trace.push_back(empirical_class_distribution(out.scores, unlabelled));

  std::vector<double> ratio(classes);
  for (std::size_t t = 0; t < cfg.max_iter; ++t) {
    const PriorDistribution& current = out.trace.back();
    bool all_one = true;
    for (std::size_t c = 0; c < classes; ++c) {
      double r;
      if (current[c] == 0.0) {
        r = prior[c] == 0.0 ? 1.0 : cfg.clip_hi;
      } else {
        r = prior[c] / current[c];
      }
      ratio[c] = std::clamp(r, cfg.clip_lo, cfg.clip_hi);
      all_one = all_one && ratio[c] == 1.0;
    }
    if (!all_one) {
      for (std::size_t i : unlabelled)
        for (std::size_t c = 0; c < classes; ++c) out.scores(i, c) *= ratio[c];
    }
    out.uniform_rows += detail::normalize_rows(out.scores);
    out.trace.push_back(empirical_class_distribution(out.scores, unlabelled));
  }
  return out;
}

// Parses "uniform" or a comma-separated list of C probabilities.
inline PriorDistribution parse_prior(const std::string& text, std::size_t classes) {
  if (text == "uniform") return PriorDistribution::uniform(classes);
  std::vector<double> probs;
  for (const auto& field : detail::split_csv_line(text)) probs.push_back(detail::parse_double(field, "prior"));
  if (probs.size() != classes)
    throw InputError("prior has " + std::to_string(probs.size()) + " entries, expected " + std::to_string(classes));
  return PriorDistribution(std::move(probs));
}

}  // namespace gssl
