#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "gssl/data/dataset.hpp"

namespace gssl {

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = kCifarSide * kCifarSide;
inline constexpr std::size_t kCifarRecord = 1 + 3 * kCifarPixels;

// Records of one label byte then 1024 R, 1024 G and 1024 B bytes, each plane
// row-major. `classes` of 0 infers 10 or 100 from the largest label.
inline Dataset read_cifar_binary(const std::string& path, std::size_t classes = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open CIFAR file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  if (bytes.empty()) throw FormatError(path + ": empty file");
  if (bytes.size() % kCifarRecord != 0) {
    const std::size_t complete = bytes.size() / kCifarRecord;
    throw FormatError(path + ": truncated record " + std::to_string(complete) + " starting at byte offset " +
                      std::to_string(complete * kCifarRecord) + " (file has " + std::to_string(bytes.size()) + " bytes)");
  }
  if (classes > 100) throw InvalidConfig("CIFAR class count must be at most 100");
  const std::size_t n = bytes.size() / kCifarRecord;
  Dataset ds;
  ds.image = ImageShape{kCifarSide, kCifarSide, 3};
  ds.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(3 * kCifarPixels));
  ds.labels.resize(n);
  int max_label = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const unsigned char* rec = bytes.data() + r * kCifarRecord;
    const int label = rec[0];
    if (label > 99 || (classes > 0 && static_cast<std::size_t>(label) >= classes))
      throw FormatError(path + ": label " + std::to_string(label) + " at byte offset " +
                        std::to_string(r * kCifarRecord) + " out of range");
    ds.labels[r] = label;
    max_label = std::max(max_label, label);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < kCifarPixels; ++p)
        ds.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p * 3 + c)) =
            from_level(rec[1 + c * kCifarPixels + p]);
  }
  ds.classes = classes > 0 ? classes : (max_label < 10 ? 10 : 100);
  return ds;
}

inline void write_cifar_binary(const std::string& path, const Dataset& ds) {
  if (!ds.image || !(*ds.image == ImageShape{kCifarSide, kCifarSide, 3}))
    throw InputError("CIFAR writer needs 32x32x3 images");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write CIFAR file: " + path);
  std::vector<unsigned char> rec(kCifarRecord);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    if (ds.labels[r] < 0 || ds.labels[r] > 99) throw InputError("label does not fit the CIFAR format");
    rec[0] = static_cast<unsigned char>(ds.labels[r]);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t p = 0; p < kCifarPixels; ++p)
        rec[1 + c * kCifarPixels + p] = static_cast<unsigned char>(
            to_level(static_cast<float>(ds.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p * 3 + c)))));
    out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  }
}

}  // namespace gssl
