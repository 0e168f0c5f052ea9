#pragma once

#include <cstddef>
#include <vector>

#include "gssl/augment/image.hpp"
#include "gssl/augment/transforms.hpp"
#include "gssl/core/error.hpp"
#include "gssl/core/random.hpp"

namespace gssl {

// Per-channel (v - mean) / std. Empty vectors mean no normalization.
struct Normalization {
  std::vector<float> mean;
  std::vector<float> stddev;

  static Normalization cifar10() { return {{0.4914f, 0.4822f, 0.4465f}, {0.2470f, 0.2435f, 0.2616f}}; }

  void apply(ImageBuffer& img) const {
    if (mean.empty()) return;
    if (mean.size() != img.channels || stddev.size() != img.channels)
      throw InvalidConfig("normalization statistics do not match the channel count");
    for (std::size_t p = 0; p < img.data.size(); ++p) {
      const std::size_t c = p % img.channels;
      img.data[p] = (img.data[p] - mean[c]) / stddev[c];
    }
  }
};

struct AugmentPolicy {
  std::vector<TransformKind> pool{kAllTransformKinds.begin(), kAllTransformKinds.end()};
  std::size_t ra_samples_labelled = 1;
  std::size_t ra_samples_unlabelled = 2;
  double cutout_min = 0.0;
  double cutout_max = 0.5;
  std::size_t crop_pad = 4;
  double flip_prob = 0.5;
  Normalization normalization;

  void validate() const {
    if (pool.empty()) throw InvalidConfig("augmentation pool is empty");
    if (!(cutout_min >= 0.0 && cutout_min <= cutout_max && cutout_max <= 0.5))
      throw InvalidConfig("cutout range must satisfy 0 <= min <= max <= 0.5");
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw InvalidConfig("flip_prob must lie in [0, 1]");
  }

  // Policy whose every stage is an identity: no flip, no padding, only the
  // Identity transform, zero-size cutout.
  static AugmentPolicy identity() {
    AugmentPolicy p;
    p.pool = {TransformKind::kIdentity};
    p.cutout_max = 0.0;
    p.crop_pad = 0;
    p.flip_prob = 0.0;
    return p;
  }
};

// Uniform kind from the pool, magnitude uniform over its range (discrete
// uniform for integral ranges).
inline TransformSpec randaugment_sample(Rng& rng, const AugmentPolicy& policy) {
  if (policy.pool.empty()) throw InvalidConfig("augmentation pool is empty");
  TransformSpec spec;
  spec.kind = policy.pool[uniform_index(rng, policy.pool.size())];
  const auto r = magnitude_range(spec.kind);
  if (r.integral) {
    const auto span = static_cast<std::size_t>(r.hi - r.lo) + 1;
    spec.magnitude = r.lo + static_cast<double>(uniform_index(rng, span));
  } else {
    spec.magnitude = r.hi > r.lo ? uniform(rng, r.lo, r.hi) : r.lo;
  }
  return spec;
}

struct PipelineTrace {
  std::vector<TransformSpec> applied;  // RandAugment draws, in order
  bool flipped = false;
  double cutout_fraction = 0.0;
};

// flip -> crop with pad -> `ra_samples` RandAugment draws -> CutOut -> normalize.
inline ImageBuffer run_pipeline(const ImageBuffer& img, Rng& rng, const AugmentPolicy& policy,
                                std::size_t ra_samples, PipelineTrace* trace = nullptr) {
  policy.validate();
  ImageBuffer out = img;
  const bool flip = bernoulli(rng, policy.flip_prob);
  if (flip) out = horizontal_flip(out);
  out = random_crop_with_pad(out, policy.crop_pad, rng);
  for (std::size_t s = 0; s < ra_samples; ++s) {
    const auto spec = randaugment_sample(rng, policy);
    out = apply_transform(out, spec);
    if (trace) trace->applied.push_back(spec);
  }
  const double fraction = policy.cutout_max > policy.cutout_min ? uniform(rng, policy.cutout_min, policy.cutout_max)
                                                                 : policy.cutout_min;
  out = cutout(out, fraction, rng);
  if (trace) {
    trace->flipped = flip;
    trace->cutout_fraction = fraction;
  }
  policy.normalization.apply(out);
  return out;
}

inline ImageBuffer labelled_pipeline(const ImageBuffer& img, Rng& rng, const AugmentPolicy& policy,
                                     PipelineTrace* trace = nullptr) {
  return run_pipeline(img, rng, policy, policy.ra_samples_labelled, trace);
}

inline ImageBuffer unlabelled_pipeline(const ImageBuffer& img, Rng& rng, const AugmentPolicy& policy,
                                       PipelineTrace* trace = nullptr) {
  return run_pipeline(img, rng, policy, policy.ra_samples_unlabelled, trace);
}

}  // namespace gssl
