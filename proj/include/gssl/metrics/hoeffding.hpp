#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gssl/core/error.hpp"
#include "gssl/core/random.hpp"

namespace gssl {

using LossSampler = std::function<double(Rng&)>;

// 2 exp(-2 n_a eps^2 / (b - a)^2)
inline double hoeffding_bound(std::size_t n_a, double eps, double width) {
  return 2.0 * std::exp(-2.0 * static_cast<double>(n_a) * eps * eps / (width * width));
}

inline LossSampler bernoulli_sampler(double p) {
  return [p](Rng& rng) { return bernoulli(rng, p) ? 1.0 : 0.0; };
}

inline LossSampler clipped_gaussian_sampler(double mean, double sd, double lo, double hi) {
  return [=](Rng& rng) { return std::clamp(mean + sd * normal(rng), lo, hi); };
}

struct HoeffdingOptions {
  std::size_t n_a = 3;
  double eps = 0.5;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t trials = 100000;
  std::size_t mean_draws = 1000000;
  std::uint64_t seed = 0;
};

struct HoeffdingReport {
  std::size_t n_a = 0;
  double eps = 0.0;
  double width = 0.0;
  double empirical_tail = 0.0;
  double bound = 0.0;
  double standard_error = 0.0;  // Monte-Carlo standard error of the tail estimate
  double estimated_mean = 0.0;
  std::size_t trials = 0;

  bool within_bound(double num_se = 3.0) const { return empirical_tail <= bound + num_se * standard_error; }
};

// Monte-Carlo estimate of P[|mean of n_a draws - E| > eps]. E itself is
// estimated from `mean_draws` separate draws.
inline HoeffdingReport hoeffding_check(const LossSampler& sampler, const HoeffdingOptions& opts) {
  if (opts.trials < 10000) throw InvalidConfig("hoeffding_check needs at least 10^4 trials");
  if (opts.n_a == 0) throw InvalidConfig("n_a must be positive");
  if (!(opts.eps > 0.0)) throw InvalidConfig("eps must be positive");
  if (!(opts.hi > opts.lo)) throw InvalidConfig("sampler range must have positive width");
  const auto draw = [&](Rng& rng) {
    const double v = sampler(rng);
    if (!(v >= opts.lo && v <= opts.hi))
      throw InputError("sampler produced " + std::to_string(v) + " outside [" + std::to_string(opts.lo) + ", " +
                       std::to_string(opts.hi) + "]");
    return v;
  };
  Rng mean_rng = make_rng({opts.seed, 0x6D65616EULL});
  double mean = 0.0;
  for (std::size_t i = 0; i < opts.mean_draws; ++i) mean += draw(mean_rng);
  mean /= static_cast<double>(std::max<std::size_t>(opts.mean_draws, 1));

  Rng rng = make_rng({opts.seed, 0x7461696CULL, opts.n_a});
  std::size_t hits = 0;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < opts.n_a; ++j) s += draw(rng);
    if (std::abs(s / static_cast<double>(opts.n_a) - mean) > opts.eps) ++hits;
  }
  HoeffdingReport r;
  r.n_a = opts.n_a;
  r.eps = opts.eps;
  r.width = opts.hi - opts.lo;
  r.trials = opts.trials;
  r.estimated_mean = mean;
  r.empirical_tail = static_cast<double>(hits) / static_cast<double>(opts.trials);
  r.bound = hoeffding_bound(opts.n_a, opts.eps, r.width);
  r.standard_error = std::sqrt(r.empirical_tail * (1.0 - r.empirical_tail) / static_cast<double>(opts.trials));
  return r;
}

}  // namespace gssl
