#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "gssl/core/random.hpp"
#include "gssl/data/dataset.hpp"
#include "gssl/graph/labels.hpp"

namespace gssl {

struct SplitSpec {
  std::size_t n_labelled = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
};

// Labelled subset of size n_l; the rest is unlabelled. Stratified splits give
// every class floor(n_l / C) labels and hand the remainder to randomly chosen
// classes, one each.
inline LabelSeed make_split(const Dataset& ds, const SplitSpec& spec) {
  ds.validate();
  const std::size_t n = ds.size();
  if (spec.n_labelled > n)
    throw InvalidConfig("n_labelled = " + std::to_string(spec.n_labelled) + " exceeds dataset size " + std::to_string(n));
  Rng rng = make_rng({spec.seed, 0x73706C6974ULL});
  std::vector<std::size_t> chosen;
  if (spec.stratified) {
    if (spec.n_labelled < ds.classes)
      throw InvalidConfig("stratified split needs n_labelled >= number of classes (" + std::to_string(ds.classes) + ")");
    std::vector<std::vector<std::size_t>> by_class(ds.classes);
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    std::vector<std::size_t> quota(ds.classes, spec.n_labelled / ds.classes);
    std::vector<std::size_t> order(ds.classes);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    std::size_t remaining = spec.n_labelled % ds.classes;
    for (std::size_t c : order)
      if (remaining > 0) ++quota[c], --remaining;
    // Classes too small for their quota pass the excess on.
    std::size_t excess = 0;
    for (std::size_t c = 0; c < ds.classes; ++c) {
      if (by_class[c].empty()) throw InvalidConfig("stratified split: class " + std::to_string(c) + " has no samples");
      if (quota[c] > by_class[c].size()) excess += quota[c] - by_class[c].size(), quota[c] = by_class[c].size();
    }
    for (std::size_t c : order)
      while (excess > 0 && quota[c] < by_class[c].size()) ++quota[c], --excess;
    for (std::size_t c = 0; c < ds.classes; ++c) {
      auto& pool = by_class[c];
      shuffle(pool.begin(), pool.end(), rng);
      chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    shuffle(all.begin(), all.end(), rng);
    chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(spec.n_labelled));
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<int> labels;
  for (std::size_t i : chosen) labels.push_back(ds.labels[i]);
  return LabelSeed::make(n, ds.classes, std::move(chosen), std::move(labels));
}

// Split file: one labelled sample per line, either "index" (label taken from
// the dataset) or "index,label". Blank lines and lines starting with '#' are skipped.
struct SplitFileEntry {
  std::size_t index = 0;
  std::optional<int> label;
};

inline std::vector<SplitFileEntry> read_split_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open split file: " + path);
  std::vector<SplitFileEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.empty() || fields.size() > 2) throw FormatError(path + ":" + std::to_string(line_no) + ": expected index[,label]");
    try {
      std::size_t pos = 0;
      const long long idx = std::stoll(fields[0], &pos);
      if (pos != fields[0].size() || idx < 0) throw std::invalid_argument("index");
      SplitFileEntry e{static_cast<std::size_t>(idx), std::nullopt};
      if (fields.size() == 2) {
        const int y = std::stoi(fields[1], &pos);
        if (pos != fields[1].size()) throw std::invalid_argument("label");
        e.label = y;
      }
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": cannot parse '" + line + "'");
    }
  }
  return out;
}

inline void write_split_file(const std::string& path, const LabelSeed& seed) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write split file: " + path);
  for (std::size_t k = 0; k < seed.labelled.size(); ++k) out << seed.labelled[k] << ',' << seed.labels[k] << '\n';
}

// Builds the label seed for n samples from split entries. Entries without a
// label take theirs from `fallback` (ground truth), which must then be given.
inline LabelSeed seed_from_entries(std::size_t n, std::size_t classes, const std::vector<SplitFileEntry>& entries,
                                   const std::vector<int>* fallback = nullptr) {
  std::vector<std::size_t> idx;
  std::vector<int> labels;
  for (const auto& e : entries) {
    if (e.index >= n) throw InputError("split index " + std::to_string(e.index) + " out of range for " + std::to_string(n) + " samples");
    idx.push_back(e.index);
    if (e.label) {
      labels.push_back(*e.label);
    } else {
      if (!fallback) throw InputError("split entry " + std::to_string(e.index) + " has no label and none is available");
      labels.push_back((*fallback)[e.index]);
    }
  }
  return LabelSeed::make(n, classes, std::move(idx), std::move(labels));
}

}  // namespace gssl
