#pragma once

#include <optional>
#include <string>

#include "gssl/core/random.hpp"
#include "gssl/data/cifar.hpp"
#include "gssl/data/registry.hpp"
#include "gssl/data/split.hpp"
#include "gssl/trainer/trainer.hpp"

namespace gssl {

// Where the training data comes from. `train` is a synthetic dataset name or
// a CIFAR binary path; empty means the config's data.dataset. `split_file`
// replaces the random split when set.
struct DataSources {
  std::string train;
  std::string test;
  std::string split_file;
};

inline constexpr std::uint64_t kTrainDataStream = 1;
inline constexpr std::uint64_t kTestDataStream = 2;

inline Dataset load_dataset(const std::string& name_or_path, std::size_t n, double noise, std::uint64_t seed) {
  if (is_synthetic(name_or_path)) return make_synthetic(name_or_path, n, noise, seed);
  return read_cifar_binary(name_or_path);
}

// Synthetic train and test sets are drawn from independent streams of the
// run seed; the split uses the run seed directly.
inline TrainData prepare_data(const RunConfig& cfg, const DataSources& src = {}) {
  const std::string train_name = src.train.empty() ? cfg.dataset : src.train;
  Dataset train = load_dataset(train_name, cfg.n_train, cfg.noise, derive_seed({cfg.seed, kTrainDataStream}));
  train.tag = "train";
  std::optional<Dataset> test;
  if (!src.test.empty()) {
    test = read_cifar_binary(src.test, train.classes);
  } else if (is_synthetic(train_name) && cfg.n_test > 0) {
    test = make_synthetic(train_name, cfg.n_test, cfg.noise, derive_seed({cfg.seed, kTestDataStream}));
  }
  if (test) test->tag = "test";
  LabelSeed seed = src.split_file.empty()
                       ? make_split(train, {cfg.n_labelled, cfg.seed, cfg.stratified})
                       : seed_from_entries(train.size(), train.classes, read_split_file(src.split_file), &train.labels);
  return {std::move(train), std::move(seed), std::move(test)};
}

}  // namespace gssl
