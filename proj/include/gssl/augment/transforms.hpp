#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "gssl/augment/image.hpp"
#include "gssl/core/error.hpp"
#include "gssl/core/random.hpp"

namespace gssl {

enum class TransformKind {
  kAutocontrast,
  kBrightness,
  kColor,
  kContrast,
  kEqualise,
  kIdentity,
  kPosterise,
  kRotate,
  kSharpness,
  kShearX,
  kShearY,
  kSolarize,
  kTranslateX,
  kTranslateY,
};

inline constexpr std::size_t kTransformKindCount = 14;

inline constexpr std::array<TransformKind, kTransformKindCount> kAllTransformKinds = {
    TransformKind::kAutocontrast, TransformKind::kBrightness, TransformKind::kColor,     TransformKind::kContrast,
    TransformKind::kEqualise,     TransformKind::kIdentity,   TransformKind::kPosterise, TransformKind::kRotate,
    TransformKind::kSharpness,    TransformKind::kShearX,     TransformKind::kShearY,    TransformKind::kSolarize,
    TransformKind::kTranslateX,   TransformKind::kTranslateY,
};

struct MagnitudeRange {
  double lo = 0.0;
  double hi = 0.0;
  bool integral = false;
};

// Magnitude ranges of the RandAugment pool. Parameter-free kinds use [0, 0].
inline constexpr MagnitudeRange magnitude_range(TransformKind kind) {
  switch (kind) {
    case TransformKind::kBrightness:
    case TransformKind::kColor:
    case TransformKind::kContrast:
    case TransformKind::kSharpness:
      return {0.05, 0.95};
    case TransformKind::kPosterise:
      return {4.0, 8.0, true};
    case TransformKind::kRotate:
      return {-30.0, 30.0};
    case TransformKind::kShearX:
    case TransformKind::kShearY:
    case TransformKind::kTranslateX:
    case TransformKind::kTranslateY:
      return {-0.3, 0.3};
    case TransformKind::kSolarize:
      return {0.0, 1.0};
    default:
      return {0.0, 0.0};
  }
}

inline constexpr std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kAutocontrast: return "Autocontrast";
    case TransformKind::kBrightness: return "Brightness";
    case TransformKind::kColor: return "Color";
    case TransformKind::kContrast: return "Contrast";
    case TransformKind::kEqualise: return "Equalise";
    case TransformKind::kIdentity: return "Identity";
    case TransformKind::kPosterise: return "Posterise";
    case TransformKind::kRotate: return "Rotate";
    case TransformKind::kSharpness: return "Sharpness";
    case TransformKind::kShearX: return "ShearX";
    case TransformKind::kShearY: return "ShearY";
    case TransformKind::kSolarize: return "Solarize";
    case TransformKind::kTranslateX: return "TranslateX";
    case TransformKind::kTranslateY: return "TranslateY";
  }
  return "?";
}

inline std::optional<TransformKind> parse_transform_kind(std::string_view name) {
  for (auto kind : kAllTransformKinds)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

struct TransformSpec {
  TransformKind kind = TransformKind::kIdentity;
  double magnitude = 0.0;

  void validate() const {
    const auto r = magnitude_range(kind);
    if (!(magnitude >= r.lo && magnitude <= r.hi) || (r.integral && magnitude != std::round(magnitude)))
      throw InvalidConfig(std::string(to_string(kind)) + " magnitude " + std::to_string(magnitude) +
                          " outside [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
  }
  bool operator==(const TransformSpec&) const = default;
};

// Fill value for pixels exposed by geometric transforms and CutOut.
inline constexpr float kFillGray = 0.5f;

namespace detail {

inline void clip_unit(ImageBuffer& img) {
  for (auto& v : img.data) v = std::clamp(v, 0.0f, 1.0f);
}

inline float luminance(const ImageBuffer& img, std::size_t y, std::size_t x) {
  if (img.channels == 1) return img.at(y, x, 0);
  return 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
}

// out = (1 - m) * degenerate + m * img.
inline ImageBuffer blend(const ImageBuffer& degenerate, const ImageBuffer& img, double m) {
  ImageBuffer out = img;
  const auto mf = static_cast<float>(m);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = (1.0f - mf) * degenerate.data[i] + mf * img.data[i];
  clip_unit(out);
  return out;
}

// Inverse-mapped nearest-neighbour resampling; `source` maps output pixel
// coordinates to input coordinates.
template <typename Map>
ImageBuffer resample(const ImageBuffer& img, Map&& source) {
  ImageBuffer out(img.height, img.width, img.channels, kFillGray);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const auto [sx, sy] = source(static_cast<double>(x), static_cast<double>(y));
      const double rx = std::floor(sx + 0.5), ry = std::floor(sy + 0.5);
      if (rx < 0 || ry < 0 || rx >= static_cast<double>(img.width) || ry >= static_cast<double>(img.height)) continue;
      for (std::size_t c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(static_cast<std::size_t>(ry), static_cast<std::size_t>(rx), c);
    }
  }
  return out;
}

inline ImageBuffer autocontrast(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t c = 0; c < img.channels; ++c) {
    int lo = 255, hi = 0;
    for (std::size_t p = c; p < img.data.size(); p += img.channels) {
      const int q = to_level(img.data[p]);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    for (std::size_t p = c; p < img.data.size(); p += img.channels) {
      const int q = to_level(img.data[p]);
      out.data[p] = hi > lo ? static_cast<float>(q - lo) / static_cast<float>(hi - lo) : from_level(q);
    }
  }
  return out;
}

// Histogram equalization per channel on 256 levels (PIL's ImageOps.equalize).
inline ImageBuffer equalise(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t c = 0; c < img.channels; ++c) {
    std::array<long, 256> hist{};
    for (std::size_t p = c; p < img.data.size(); p += img.channels) ++hist[to_level(img.data[p])];
    long total = 0, last = 0;
    for (int q = 0; q < 256; ++q) {
      total += hist[q];
      if (hist[q] > 0) last = hist[q];
    }
    const long step = (total - last) / 255;
    std::array<int, 256> lut{};
    if (step == 0) {
      for (int q = 0; q < 256; ++q) lut[q] = q;
    } else {
      long acc = step / 2;
      for (int q = 0; q < 256; ++q) {
        lut[q] = static_cast<int>(std::min<long>(acc / step, 255));
        acc += hist[q];
      }
    }
    for (std::size_t p = c; p < img.data.size(); p += img.channels) out.data[p] = from_level(lut[to_level(img.data[p])]);
  }
  return out;
}

inline ImageBuffer posterise(const ImageBuffer& img, int bits) {
  ImageBuffer out = img;
  const int mask = ~((1 << (8 - bits)) - 1) & 0xFF;
  for (auto& v : out.data) v = from_level(to_level(v) & mask);
  return out;
}

// 3x3 smoothing kernel [[1,1,1],[1,5,1],[1,1,1]] / 13, borders unchanged.
inline ImageBuffer smooth(const ImageBuffer& img) {
  ImageBuffer out = img;
  if (img.height < 3 || img.width < 3) return out;
  for (std::size_t y = 1; y + 1 < img.height; ++y)
    for (std::size_t x = 1; x + 1 < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) {
        float acc = 4.0f * img.at(y, x, c);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) acc += img.at(y + dy, x + dx, c);
        out.at(y, x, c) = acc / 13.0f;
      }
  return out;
}

}  // namespace detail

// Applies one pool transform. Output has the input's shape and values in [0, 1].
inline ImageBuffer apply_transform(const ImageBuffer& img, const TransformSpec& spec) {
  spec.validate();
  const double m = spec.magnitude;
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  ImageBuffer out;
  switch (spec.kind) {
    case TransformKind::kIdentity:
      return img;
    case TransformKind::kAutocontrast:
      out = detail::autocontrast(img);
      break;
    case TransformKind::kEqualise:
      out = detail::equalise(img);
      break;
    case TransformKind::kPosterise:
      out = detail::posterise(img, static_cast<int>(m));
      break;
    case TransformKind::kSolarize:
      out = img;
      for (auto& v : out.data)
        if (v > static_cast<float>(m)) v = 1.0f - v;
      break;
    case TransformKind::kBrightness:
      out = detail::blend(ImageBuffer(img.height, img.width, img.channels, 0.0f), img, m);
      break;
    case TransformKind::kColor: {
      ImageBuffer gray = img;
      for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) {
          const float l = detail::luminance(img, y, x);
          for (std::size_t c = 0; c < img.channels; ++c) gray.at(y, x, c) = l;
        }
      out = detail::blend(gray, img, m);
      break;
    }
    case TransformKind::kContrast: {
      double mean = 0.0;
      for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) mean += detail::luminance(img, y, x);
      mean /= static_cast<double>(img.height * img.width);
      out = detail::blend(ImageBuffer(img.height, img.width, img.channels, static_cast<float>(mean)), img, m);
      break;
    }
    case TransformKind::kSharpness:
      out = detail::blend(detail::smooth(img), img, m);
      break;
    case TransformKind::kRotate: {
      const double rad = m * 3.14159265358979323846 / 180.0;
      const double c = std::cos(rad), s = std::sin(rad);
      out = detail::resample(img, [&](double x, double y) {
        const double dx = x - cx, dy = y - cy;
        return std::pair{cx + c * dx + s * dy, cy - s * dx + c * dy};
      });
      break;
    }
    case TransformKind::kShearX:
      out = detail::resample(img, [&](double x, double y) { return std::pair{x + m * (y - cy), y}; });
      break;
    case TransformKind::kShearY:
      out = detail::resample(img, [&](double x, double y) { return std::pair{x, y + m * (x - cx)}; });
      break;
    case TransformKind::kTranslateX: {
      const double shift = m * static_cast<double>(img.width);
      out = detail::resample(img, [&](double x, double y) { return std::pair{x - shift, y}; });
      break;
    }
    case TransformKind::kTranslateY: {
      const double shift = m * static_cast<double>(img.height);
      out = detail::resample(img, [&](double x, double y) { return std::pair{x, y - shift}; });
      break;
    }
  }
  detail::clip_unit(out);
  return out;
}

// Square patch of side round(side_fraction * width), centred at a uniformly
// drawn pixel and clipped at the borders, set to gray.
inline ImageBuffer cutout(const ImageBuffer& img, double side_fraction, Rng& rng) {
  if (!(side_fraction >= 0.0 && side_fraction <= 0.5)) throw InvalidConfig("cutout side fraction must lie in [0, 0.5]");
  ImageBuffer out = img;
  const auto side = static_cast<long>(std::lround(side_fraction * static_cast<double>(img.width)));
  const auto cx = static_cast<long>(uniform_index(rng, img.width));
  const auto cy = static_cast<long>(uniform_index(rng, img.height));
  const long x0 = std::max(0L, cx - side / 2), y0 = std::max(0L, cy - side / 2);
  const long x1 = std::min(static_cast<long>(img.width), cx - side / 2 + side);
  const long y1 = std::min(static_cast<long>(img.height), cy - side / 2 + side);
  for (long y = y0; y < y1; ++y)
    for (long x = x0; x < x1; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) out.at(y, x, c) = kFillGray;
  return out;
}

inline ImageBuffer horizontal_flip(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

namespace detail {

// Reflect index into [0, n) without repeating the edge pixel.
inline long reflect(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace detail

// Reflection-pads by `pad` pixels and takes a random crop of the original size.
inline ImageBuffer random_crop_with_pad(const ImageBuffer& img, std::size_t pad, Rng& rng) {
  if (pad == 0) return img;
  const auto ox = static_cast<long>(uniform_index(rng, 2 * pad + 1)) - static_cast<long>(pad);
  const auto oy = static_cast<long>(uniform_index(rng, 2 * pad + 1)) - static_cast<long>(pad);
  ImageBuffer out = img;
  const auto w = static_cast<long>(img.width), h = static_cast<long>(img.height);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      const long sx = detail::reflect(x + ox, w), sy = detail::reflect(y + oy, h);
      for (std::size_t c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  return out;
}

}  // namespace gssl
