#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gssl/augment/image.hpp"
#include "gssl/core/error.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;

  std::size_t size() const { return height * width * channels; }
  bool operator==(const ImageShape&) const = default;
};

// Samples as flattened rows. Image datasets keep pixel values in [0, 1],
// interleaved channels, row-major, and record their raster shape.
struct Dataset {
  RowMatrix inputs;
  std::vector<int> labels;
  std::size_t classes = 0;
  std::string tag = "train";
  std::optional<ImageShape> image;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }

  void validate() const {
    if (static_cast<std::size_t>(inputs.rows()) != labels.size())
      throw InputError("dataset: " + std::to_string(inputs.rows()) + " inputs but " + std::to_string(labels.size()) +
                       " labels");
    if (classes == 0) throw InputError("dataset declares no classes");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
        throw InputError("dataset: label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                         " outside [0, " + std::to_string(classes) + ")");
    if (image && image->size() != dim()) throw InputError("dataset: image shape does not match input width");
    if (!inputs.allFinite()) throw InputError("dataset contains non-finite inputs");
  }

  ImageBuffer image_at(std::size_t i) const {
    if (!image) throw InputError("dataset has no image shape");
    ImageBuffer img(image->height, image->width, image->channels);
    const auto row = inputs.row(static_cast<Eigen::Index>(i));
    for (std::size_t p = 0; p < img.size(); ++p) img.data[p] = static_cast<float>(row[static_cast<Eigen::Index>(p)]);
    return img;
  }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.classes = classes;
    out.tag = tag;
    out.image = image;
    out.inputs.resize(static_cast<Eigen::Index>(idx.size()), inputs.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] >= size()) throw InputError("subset index " + std::to_string(idx[r]) + " out of range");
      out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(idx[r]));
      out.labels.push_back(labels[idx[r]]);
    }
    return out;
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(classes, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
  }
};

inline RowMatrix image_rows(const std::vector<ImageBuffer>& images) {
  if (images.empty()) return {};
  RowMatrix out(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(images.front().size()));
  for (std::size_t r = 0; r < images.size(); ++r) {
    if (images[r].size() != images.front().size()) throw InputError("images differ in size");
    for (std::size_t p = 0; p < images[r].size(); ++p)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = images[r].data[p];
  }
  return out;
}

}  // namespace gssl
