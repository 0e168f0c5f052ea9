#pragma once

#include <cmath>
#include <numbers>

#include "gssl/core/random.hpp"
#include "gssl/data/dataset.hpp"

namespace gssl {

// Two interleaving unit half-circles: class 0 on (cos t, sin t), class 1 on
// (1 - cos t, 0.5 - sin t), t uniform on [0, pi], plus isotropic Gaussian
// noise. Classes alternate by row.
inline Dataset two_moons(std::size_t n, double noise_sd = 0.1, std::uint64_t seed = 0) {
  if (n == 0 || n % 2 != 0) throw InvalidConfig("two_moons needs a positive even sample count");
  if (noise_sd < 0.0) throw InvalidConfig("noise_sd must be nonnegative");
  Rng rng = make_rng({seed, 0x6D6F6F6EULL});
  Dataset ds;
  ds.classes = 2;
  ds.inputs.resize(static_cast<Eigen::Index>(n), 2);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double t = uniform(rng, 0.0, std::numbers::pi);
    double a = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double b = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (noise_sd > 0.0) {
      a += noise_sd * normal(rng);
      b += noise_sd * normal(rng);
    }
    ds.inputs(static_cast<Eigen::Index>(i), 0) = a;
    ds.inputs(static_cast<Eigen::Index>(i), 1) = b;
    ds.labels[i] = y;
  }
  return ds;
}

// Isotropic Gaussian clusters, one per row of `centers`; row i has class i mod C.
inline Dataset gaussian_blobs(std::size_t n, const RowMatrix& centers, double sd, std::uint64_t seed = 0) {
  const auto classes = static_cast<std::size_t>(centers.rows());
  if (classes < 2) throw InvalidConfig("gaussian_blobs needs at least 2 centers");
  if (n < classes) throw InvalidConfig("gaussian_blobs needs at least one sample per class");
  if (sd < 0.0) throw InvalidConfig("sd must be nonnegative");
  for (std::size_t a = 0; a < classes; ++a)
    for (std::size_t b = a + 1; b < classes; ++b)
      if (centers.row(static_cast<Eigen::Index>(a)) == centers.row(static_cast<Eigen::Index>(b)))
        throw InvalidConfig("gaussian_blobs centers must be pairwise distinct");
  Rng rng = make_rng({seed, 0x626C6F62ULL});
  Dataset ds;
  ds.classes = classes;
  ds.inputs.resize(static_cast<Eigen::Index>(n), centers.cols());
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(i % classes);
    ds.labels[i] = static_cast<int>(c);
    for (Eigen::Index d = 0; d < centers.cols(); ++d)
      ds.inputs(static_cast<Eigen::Index>(i), d) = centers(c, d) + (sd > 0.0 ? sd * normal(rng) : 0.0);
  }
  return ds;
}

// C centers evenly spaced on a circle of the given radius in the plane.
inline RowMatrix circle_centers(std::size_t classes, double radius) {
  RowMatrix c(static_cast<Eigen::Index>(classes), 2);
  for (std::size_t i = 0; i < classes; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(classes);
    c(static_cast<Eigen::Index>(i), 0) = radius * std::cos(t);
    c(static_cast<Eigen::Index>(i), 1) = radius * std::sin(t);
  }
  return c;
}

struct MoonImageOptions {
  std::size_t side = 16;
  double noise_sd = 0.1;     // two-moons coordinate noise
  double min_offset = 1.5;   // spot offset from the centre column, pixels
  double max_offset = 6.0;
  double min_sigma = 0.9;    // spot width, pixels
  double max_sigma = 2.4;
  double pixel_noise = 0.01;
};

// Two-moons rendered as grayscale images. Each image holds a mirror-image
// pair of Gaussian spots on the middle row: the first moon coordinate sets
// their horizontal offset from the centre, the second their width. Both are
// unchanged by flips and translations.
inline Dataset moon_images(std::size_t n, std::uint64_t seed, const MoonImageOptions& opts = {}) {
  if (opts.side < 8) throw InvalidConfig("moon image side must be at least 8");
  const Dataset latent = two_moons(n, opts.noise_sd, seed);
  Rng rng = make_rng({seed, 0x70697865ULL});
  const std::size_t s = opts.side;
  const double c = 0.5 * static_cast<double>(s - 1);
  Dataset ds;
  ds.classes = 2;
  ds.labels = latent.labels;
  ds.image = ImageShape{s, s, 1};
  ds.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s * s));
  for (std::size_t i = 0; i < n; ++i) {
    // Moon coordinates span roughly [-1.3, 2.3] x [-0.8, 1.3].
    const double u = std::clamp((latent.inputs(static_cast<Eigen::Index>(i), 0) + 1.3) / 3.6, 0.0, 1.0);
    const double v = std::clamp((latent.inputs(static_cast<Eigen::Index>(i), 1) + 0.8) / 2.1, 0.0, 1.0);
    const double offset = opts.min_offset + u * (opts.max_offset - opts.min_offset);
    const double sigma = opts.min_sigma + v * (opts.max_sigma - opts.min_sigma);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t y = 0; y < s; ++y)
      for (std::size_t x = 0; x < s; ++x) {
        const double dy = static_cast<double>(y) - c;
        const double dl = static_cast<double>(x) - (c - offset), dr = static_cast<double>(x) - (c + offset);
        double val = std::exp(-(dl * dl + dy * dy) * inv) + std::exp(-(dr * dr + dy * dy) * inv);
        if (opts.pixel_noise > 0.0) val += opts.pixel_noise * normal(rng);
        ds.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y * s + x)) = std::clamp(val, 0.0, 1.0);
      }
  }
  return ds;
}

}  // namespace gssl
