#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "gssl/augment/image.hpp"
#include "gssl/augment/pipeline.hpp"
#include "gssl/augment/transforms.hpp"

namespace gssl {
namespace {

ImageBuffer random_image(Rng& rng, std::size_t h, std::size_t w, std::size_t c, bool eight_bit = true) {
  ImageBuffer img(h, w, c);
  for (auto& v : img.data)
    v = eight_bit ? from_level(static_cast<int>(uniform_index(rng, 256))) : static_cast<float>(uniform(rng));
  return img;
}

std::size_t count_differing(const ImageBuffer& a, const ImageBuffer& b) {
  std::size_t n = 0;
  for (std::size_t y = 0; y < a.height; ++y)
    for (std::size_t x = 0; x < a.width; ++x) {
      bool differs = false;
      for (std::size_t c = 0; c < a.channels; ++c) differs |= a.at(y, x, c) != b.at(y, x, c);
      n += differs;
    }
  return n;
}

TEST(Transforms, IdentityMagnitudesAreBitwiseIdentities) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_image(rng, 8 + trial, 32 - trial, trial % 2 ? 3 : 1);
    for (const TransformSpec spec : {TransformSpec{TransformKind::kIdentity, 0.0}, {TransformKind::kRotate, 0.0},
                                     {TransformKind::kShearX, 0.0}, {TransformKind::kShearY, 0.0},
                                     {TransformKind::kTranslateX, 0.0}, {TransformKind::kTranslateY, 0.0},
                                     {TransformKind::kSolarize, 1.0}, {TransformKind::kPosterise, 8.0}}) {
      EXPECT_EQ(apply_transform(img, spec), img) << to_string(spec.kind);
    }
  }
}

TEST(Transforms, EnhanceBlendIsIdentityAtUnitFactor) {
  Rng rng(2);
  const auto img = random_image(rng, 10, 10, 3, false);
  EXPECT_EQ(detail::blend(detail::smooth(img), img, 1.0), img);
}

TEST(Transforms, DegenerateEndpoints) {
  Rng rng(3);
  const auto img = random_image(rng, 12, 12, 3, false);
  // Brightness toward black, Contrast toward a flat gray, Color toward gray levels.
  const auto dark = apply_transform(img, {TransformKind::kBrightness, 0.05});
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(dark.data[i], 0.05f * img.data[i], 1e-6);
  const auto flat = apply_transform(img, {TransformKind::kContrast, 0.05});
  float lo = 1, hi = 0;
  for (float v : flat.data) lo = std::min(lo, v), hi = std::max(hi, v);
  EXPECT_LT(hi - lo, 0.06f);
  const auto gray = apply_transform(img, {TransformKind::kColor, 0.05});
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 12; ++x) {
      EXPECT_NEAR(gray.at(y, x, 0), gray.at(y, x, 1), 0.05f);
      EXPECT_NEAR(gray.at(y, x, 1), gray.at(y, x, 2), 0.05f);
    }
}

TEST(Transforms, SolarizeInvertsAboveThreshold) {
  ImageBuffer img(1, 3, 1);
  img.data = {0.2f, 0.5f, 0.9f};
  const auto out = apply_transform(img, {TransformKind::kSolarize, 0.5});
  EXPECT_EQ(out.data, (std::vector<float>{0.2f, 0.5f, 1.0f - 0.9f}));
}

TEST(Transforms, PosteriseKeepsTopBits) {
  ImageBuffer img(1, 2, 1);
  img.data = {from_level(0b10110111), from_level(0b01001111)};
  const auto out = apply_transform(img, {TransformKind::kPosterise, 4.0});
  EXPECT_EQ(out.data, (std::vector<float>{from_level(0b10110000), from_level(0b01000000)}));
}

TEST(Transforms, AutocontrastStretchesToFullRange) {
  ImageBuffer img(1, 3, 1);
  img.data = {from_level(50), from_level(100), from_level(150)};
  const auto out = apply_transform(img, {TransformKind::kAutocontrast, 0.0});
  EXPECT_EQ(out.data[0], 0.0f);
  EXPECT_FLOAT_EQ(out.data[1], 0.5f);
  EXPECT_EQ(out.data[2], 1.0f);
}

TEST(Transforms, EqualiseFlattensHistogram) {
  ImageBuffer img(32, 32, 1);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = from_level(static_cast<int>(100 + i % 4));
  const auto out = apply_transform(img, {TransformKind::kEqualise, 0.0});
  // step = (1024 - 256) / 255 = 3; lut = (1 + cumulative count) / 3.
  std::set<float> levels(out.data.begin(), out.data.end());
  EXPECT_EQ(levels, (std::set<float>{from_level(0), from_level(85), from_level(171), from_level(255)}));
}

TEST(Transforms, EqualiseTinyImageIsIdentity) {
  ImageBuffer img(4, 4, 1);
  for (std::size_t i = 0; i < 16; ++i) img.data[i] = from_level(static_cast<int>(100 + i % 4));
  EXPECT_EQ(apply_transform(img, {TransformKind::kEqualise, 0.0}), img);
}

TEST(Transforms, TranslateShiftsAndFillsGray) {
  ImageBuffer img(1, 10, 1);
  for (std::size_t x = 0; x < 10; ++x) img.data[x] = from_level(static_cast<int>(x * 10));
  const auto out = apply_transform(img, {TransformKind::kTranslateX, 0.3});
  for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(out.data[x], kFillGray);
  for (std::size_t x = 3; x < 10; ++x) EXPECT_EQ(out.data[x], img.data[x - 3]);
}

TEST(Transforms, RejectsOutOfRangeMagnitudes) {
  const ImageBuffer img(4, 4, 1);
  EXPECT_THROW(apply_transform(img, {TransformKind::kRotate, 31.0}), InvalidConfig);
  EXPECT_THROW(apply_transform(img, {TransformKind::kBrightness, 0.0}), InvalidConfig);
  EXPECT_THROW(apply_transform(img, {TransformKind::kPosterise, 5.5}), InvalidConfig);
  EXPECT_THROW(apply_transform(img, {TransformKind::kShearX, -0.31}), InvalidConfig);
  EXPECT_THROW(apply_transform(img, {TransformKind::kAutocontrast, 0.2}), InvalidConfig);
}

TEST(Transforms, FuzzShapeAndRange) {
  Rng rng(99);
  AugmentPolicy policy;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t h = 3 + uniform_index(rng, 14), w = 3 + uniform_index(rng, 14);
    const auto img = random_image(rng, h, w, trial % 3 == 0 ? 3 : 1, trial % 2 == 0);
    const auto spec = randaugment_sample(rng, policy);
    const auto out = apply_transform(img, spec);
    ASSERT_TRUE(out.same_shape(img)) << to_string(spec.kind);
    ASSERT_TRUE(out.in_unit_range()) << to_string(spec.kind);
  }
}

TEST(RandAugment, SeededDeterminism) {
  Rng a(12345), b(12345);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(randaugment_sample(a, {}), randaugment_sample(b, {}));
}

TEST(RandAugment, UniformOverKindsAndRanges) {
  Rng rng(7);
  std::array<int, kTransformKindCount> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto spec = randaugment_sample(rng, {});
    ++counts[static_cast<std::size_t>(spec.kind)];
    const auto r = magnitude_range(spec.kind);
    ASSERT_GE(spec.magnitude, r.lo);
    ASSERT_LE(spec.magnitude, r.hi);
    if (spec.kind == TransformKind::kRotate) ASSERT_LE(std::abs(spec.magnitude), 30.0);
  }
  double chi2 = 0.0;
  const double expected = draws / 14.0;
  for (int c : counts) {
    EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 14.0, 0.01);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  EXPECT_LT(chi2, 34.5);  // chi-square 13 dof, p = 0.001
}

TEST(Cutout, ZeroSideLeavesImage) {
  Rng rng(4);
  const auto img = random_image(rng, 32, 32, 3);
  EXPECT_EQ(cutout(img, 0.0, rng), img);
}

TEST(Cutout, HalfWidthInteriorPatch) {
  Rng rng(5);
  ImageBuffer img(32, 32, 1, 0.0f);
  int inside = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto out = cutout(img, 0.5, rng);
    const auto changed = count_differing(img, out);
    EXPECT_LE(changed, 16u * 16u);
    if (changed == 256) {
      ++inside;
      // The changed pixels form one 16x16 gray square.
      std::size_t x0 = 32, y0 = 32;
      for (std::size_t y = 0; y < 32; ++y)
        for (std::size_t x = 0; x < 32; ++x)
          if (out.at(y, x, 0) != 0.0f) {
            EXPECT_EQ(out.at(y, x, 0), kFillGray);
            x0 = std::min(x0, x), y0 = std::min(y0, y);
          }
      for (std::size_t y = y0; y < y0 + 16; ++y)
        for (std::size_t x = x0; x < x0 + 16; ++x) EXPECT_EQ(out.at(y, x, 0), kFillGray);
    }
  }
  EXPECT_GT(inside, 50);
}

TEST(Cutout, ChangedPixelsBounded) {
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t w = 5 + uniform_index(rng, 30);
    ImageBuffer img(4 + uniform_index(rng, 30), w, 1, 0.0f);
    const double l = uniform(rng, 0.0, 0.5);
    const auto limit = static_cast<std::size_t>(std::ceil(0.5 * w));
    EXPECT_LE(count_differing(img, cutout(img, l, rng)), limit * limit);
  }
}

TEST(Cutout, RejectsOutOfRange) {
  Rng rng(1);
  EXPECT_THROW(cutout(ImageBuffer(4, 4, 1), 0.6, rng), InvalidConfig);
}

TEST(CropPad, ReflectPaddingStaysInsideSource) {
  Rng rng(3);
  const auto img = random_image(rng, 32, 32, 3);
  for (int t = 0; t < 50; ++t) {
    const auto out = random_crop_with_pad(img, 4, rng);
    ASSERT_TRUE(out.same_shape(img));
    // Reflection never introduces new values.
    std::set<float> src(img.data.begin(), img.data.end());
    for (float v : out.data) ASSERT_TRUE(src.count(v));
  }
  EXPECT_EQ(detail::reflect(-1, 5), 1);
  EXPECT_EQ(detail::reflect(5, 5), 3);
  EXPECT_EQ(detail::reflect(-4, 5), 4);
}

TEST(Pipeline, IdentityPolicyEqualsNormalizedInput) {
  Rng rng(8);
  const auto img = random_image(rng, 16, 16, 3);
  auto policy = AugmentPolicy::identity();
  policy.normalization = Normalization::cifar10();
  auto expected = img;
  policy.normalization.apply(expected);
  Rng r2(1);
  EXPECT_EQ(labelled_pipeline(img, r2, policy), expected);
  EXPECT_EQ(unlabelled_pipeline(img, r2, policy), expected);
}

TEST(Pipeline, SampleCountsPerBranch) {
  Rng rng(9);
  const auto img = random_image(rng, 16, 16, 1);
  for (int t = 0; t < 100; ++t) {
    PipelineTrace lt, ut;
    labelled_pipeline(img, rng, {}, &lt);
    unlabelled_pipeline(img, rng, {}, &ut);
    EXPECT_EQ(lt.applied.size(), 1u);
    EXPECT_EQ(ut.applied.size(), 2u);
  }
}

TEST(Pipeline, SeededDeterminismAndRange) {
  Rng rng(10);
  for (int t = 0; t < 10000; ++t) {
    const auto img = random_image(rng, 8 + t % 9, 8 + t % 7, t % 2 ? 3 : 1, t % 3 == 0);
    const auto seed = rng();
    Rng a(seed), b(seed);
    const auto out_a = unlabelled_pipeline(img, a, {});
    const auto out_b = unlabelled_pipeline(img, b, {});
    ASSERT_EQ(out_a, out_b);
    ASSERT_TRUE(out_a.same_shape(img));
    ASSERT_TRUE(out_a.in_unit_range());
  }
}

TEST(Ppm, WritesP6Header) {
  const auto path = std::filesystem::temp_directory_path() / "gssl_test.ppm";
  ImageBuffer img(2, 3, 1, 1.0f);
  write_ppm(path.string(), img);
  std::ifstream in(path, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(contents.substr(0, 11), "P6\n3 2\n255\n");
  EXPECT_EQ(contents.size(), 11u + 18u);
  EXPECT_EQ(static_cast<unsigned char>(contents[11]), 255);
}

}  // namespace
}  // namespace gssl
