#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gssl/core/error.hpp"

namespace gssl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n feature vectors of dimension d_p, one per row. Rows are the embeddings
// z(x_i) that the affinity graph is built from.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(RowMatrix data) : data_(std::move(data)) {
    if (data_.rows() < 2) throw InputError("embedding matrix needs at least 2 rows");
    if (data_.cols() < 1) throw InputError("embedding dimension must be positive");
    if (!data_.allFinite()) throw InputError("embedding matrix contains non-finite values");
  }

  std::size_t size() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  const RowMatrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }
  bool l2_normalized() const { return l2_normalized_; }

  // Rows scaled to unit Euclidean norm. All-zero rows stay zero: they carry
  // no direction and end up as isolated nodes.
  EmbeddingMatrix normalized() const {
    EmbeddingMatrix out = *this;
    for (Eigen::Index i = 0; i < out.data_.rows(); ++i) {
      const double norm = out.data_.row(i).norm();
      if (norm > 0.0) out.data_.row(i) /= norm;
    }
    out.l2_normalized_ = true;
    return out;
  }

 private:
  RowMatrix data_;
  bool l2_normalized_ = false;
};

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
  std::array<char, sizeof(T)> bytes{};
  const auto offset = in.tellg();
  if (!in.read(bytes.data(), sizeof(T))) {
    throw FormatError(what + ": truncated at byte offset " + std::to_string(static_cast<long long>(offset)));
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where + ": cannot parse '" + text + "' as a number");
  }
}

}  // namespace detail

inline constexpr std::array<char, 4> kEmbeddingMagic = {'L', 'P', 'E', 'M'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

// LPEM layout: "LPEM", u32 version, u64 n, u64 d_p, n*d_p float32 row-major.
// All integers little-endian.
inline void write_embeddings_lpem(const std::string& path, const EmbeddingMatrix& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(kEmbeddingMagic.data(), 4);
  detail::write_le<std::uint32_t>(out, kEmbeddingVersion);
  detail::write_le<std::uint64_t>(out, v.size());
  detail::write_le<std::uint64_t>(out, v.dim());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.dim(); ++j)
      detail::write_le<float>(out, static_cast<float>(v.data()(i, j)));
}

inline EmbeddingMatrix read_embeddings_lpem(std::istream& in, const std::string& path) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kEmbeddingMagic) throw FormatError(path + ": missing LPEM magic");
  const auto version = detail::read_le<std::uint32_t>(in, path);
  if (version != kEmbeddingVersion) throw FormatError(path + ": unsupported LPEM version " + std::to_string(version));
  const auto n = detail::read_le<std::uint64_t>(in, path);
  const auto d = detail::read_le<std::uint64_t>(in, path);
  if (n == 0 || d == 0 || n > (1ULL << 32) || d > (1ULL << 24)) throw FormatError(path + ": implausible LPEM shape");
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < d; ++j)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = detail::read_le<float>(in, path);
  return EmbeddingMatrix(std::move(data));
}

// One sample per line, comma separated. A first line that does not parse as
// numbers is treated as a header and skipped.
inline EmbeddingMatrix read_embeddings_csv(std::istream& in, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    try {
      for (const auto& f : fields) row.push_back(detail::parse_double(f, path + ":" + std::to_string(line_no)));
    } catch (const FormatError&) {
      if (rows.empty() && line_no == 1) continue;
      throw;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path + ": no embedding rows");
  RowMatrix data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) data(i, j) = rows[i][j];
  return EmbeddingMatrix(std::move(data));
}

// Dispatches on the magic bytes.
inline EmbeddingMatrix read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding file " + path);
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  const bool binary = in.gcount() == 4 && magic == kEmbeddingMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_embeddings_lpem(in, path) : read_embeddings_csv(in, path);
}

}  // namespace gssl
