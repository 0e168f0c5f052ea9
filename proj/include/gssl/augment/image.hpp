#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "gssl/core/error.hpp"

namespace gssl {

// height x width x channels raster, channel-interleaved, row-major.
// Pixel values live in [0, 1] until the final normalization step.
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> data;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(h * w * c, fill) {
    if (c != 1 && c != 3) throw InputError("images must have 1 or 3 channels");
  }

  float& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const ImageBuffer& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool in_unit_range() const {
    return std::all_of(data.begin(), data.end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
  }
  bool operator==(const ImageBuffer&) const = default;
};

// 8-bit level <-> [0, 1] value. Every quantizing transform goes through
// these two functions so that 8-bit-exact inputs round-trip bit for bit.
inline int to_level(float v) { return static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }
inline float from_level(int q) { return static_cast<float>(q) / 255.0f; }

// Binary PPM (P6). Single-channel images are written as gray RGB.
inline void write_ppm(const std::string& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const float v = img.at(y, x, img.channels == 3 ? c : 0);
        out.put(static_cast<char>(static_cast<std::uint8_t>(to_level(v))));
      }
}

}  // namespace gssl
