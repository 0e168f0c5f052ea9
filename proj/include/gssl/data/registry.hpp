#pragma once

#include <string>

#include "gssl/data/synthetic.hpp"

namespace gssl {

// Synthetic datasets by name: "two_moons", "moon_images" or "blobs" (four
// planar Gaussian clusters).
inline Dataset make_synthetic(const std::string& name, std::size_t n, double noise, std::uint64_t seed) {
  if (name == "two_moons") return two_moons(n, noise, seed);
  if (name == "moon_images") {
    MoonImageOptions opts;
    opts.noise_sd = noise;
    return moon_images(n, seed, opts);
  }
  if (name == "blobs") return gaussian_blobs(n, circle_centers(4, 3.0), noise, seed);
  throw InvalidConfig("unknown dataset '" + name + "' (expected two_moons, moon_images or blobs)");
}

inline bool is_synthetic(const std::string& name) {
  return name == "two_moons" || name == "moon_images" || name == "blobs";
}

}  // namespace gssl
