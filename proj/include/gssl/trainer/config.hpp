#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gssl/core/error.hpp"

namespace gssl {

using Json = nlohmann::ordered_json;

enum class PseudoLabelSource { kGraph, kNetwork };

// Every hyperparameter of a training run. Top-level names follow the
// conventional symbols; defaults are the CIFAR-10 column.
struct RunConfig {
  double alpha = 1.0;
  double mu = 0.01;
  std::size_t k = 50;
  std::uint64_t S = 250000;
  std::size_t b = 300;
  std::size_t b_l = 48;
  double lr = 0.03;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t n_a = 3;

  // solver
  double cg_tol = 1e-6;
  std::size_t cg_max_iter = 1000;
  double degree_epsilon = 1e-12;
  std::string similarity = "inner_product";

  // alignment
  bool align = true;
  std::size_t align_iterations = 10;
  double align_clip_lo = 0.99;
  double align_clip_hi = 1.01;
  std::string prior = "uniform";

  // schedule and training
  std::uint64_t lr_horizon = 255000;
  std::size_t init_epochs = 100;
  bool mixup = true;
  bool augment = true;
  std::string pseudo_labels = "graph";

  // model
  std::vector<std::size_t> hidden{128, 128};
  bool l2_embedding = true;

  // data
  std::string dataset = "moon_images";
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::size_t n_labelled = 10;
  double noise = 0.1;
  bool stratified = true;

  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t b_u() const { return b - b_l; }

  PseudoLabelSource pseudo_label_source() const {
    return pseudo_labels == "network" ? PseudoLabelSource::kNetwork : PseudoLabelSource::kGraph;
  }

  void validate() const {
    if (!(alpha > 0.0)) throw InvalidConfig("alpha must be positive");
    if (!(mu > 0.0)) throw InvalidConfig("mu must be positive");
    if (k < 1) throw InvalidConfig("k must be at least 1");
    if (S < 1) throw InvalidConfig("S must be at least 1");
    if (b_l < 1 || b_l >= b) throw InvalidConfig("b_l must satisfy 1 <= b_l < b (got b_l = " + std::to_string(b_l) +
                                                  ", b = " + std::to_string(b) + ")");
    if (!(lr >= 0.0)) throw InvalidConfig("lr must be nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidConfig("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw InvalidConfig("weight_decay must be nonnegative");
    if (n_a < 1) throw InvalidConfig("n_a must be at least 1");
    if (!(cg_tol > 0.0)) throw InvalidConfig("cg_tol must be positive");
    if (cg_max_iter < 1) throw InvalidConfig("cg_max_iter must be at least 1");
    if (similarity != "inner_product" && similarity != "gaussian")
      throw InvalidConfig("similarity must be 'inner_product' or 'gaussian'");
    if (align_iterations < 1) throw InvalidConfig("align_iterations must be at least 1");
    if (!(align_clip_lo > 0.0 && align_clip_lo <= 1.0 && align_clip_hi >= 1.0))
      throw InvalidConfig("alignment clip must satisfy 0 < lo <= 1 <= hi");
    if (lr_horizon < 1) throw InvalidConfig("lr_horizon must be positive");
    if (pseudo_labels != "graph" && pseudo_labels != "network")
      throw InvalidConfig("pseudo_labels must be 'graph' or 'network'");
    for (auto h : hidden)
      if (h == 0) throw InvalidConfig("hidden widths must be positive");
    if (n_labelled < 1) throw InvalidConfig("n_labelled must be at least 1");
    if (threads < 1) throw InvalidConfig("threads must be at least 1");
  }
};

inline Json to_json(const RunConfig& c) {
  return Json{{"alpha", c.alpha},
              {"mu", c.mu},
              {"k", c.k},
              {"S", c.S},
              {"b", c.b},
              {"b_l", c.b_l},
              {"lr", c.lr},
              {"momentum", c.momentum},
              {"weight_decay", c.weight_decay},
              {"n_a", c.n_a},
              {"solver", {{"cg_tol", c.cg_tol}, {"cg_max_iter", c.cg_max_iter}, {"degree_epsilon", c.degree_epsilon},
                          {"similarity", c.similarity}}},
              {"alignment", {{"enabled", c.align}, {"iterations", c.align_iterations}, {"clip_lo", c.align_clip_lo},
                             {"clip_hi", c.align_clip_hi}, {"prior", c.prior}}},
              {"training", {{"lr_horizon", c.lr_horizon}, {"init_epochs", c.init_epochs}, {"mixup", c.mixup},
                            {"augment", c.augment}, {"pseudo_labels", c.pseudo_labels}}},
              {"model", {{"hidden", c.hidden}, {"l2_embedding", c.l2_embedding}}},
              {"data", {{"dataset", c.dataset}, {"n_train", c.n_train}, {"n_test", c.n_test},
                        {"n_labelled", c.n_labelled}, {"noise", c.noise}, {"stratified", c.stratified}}},
              {"seed", c.seed},
              {"threads", c.threads}};
}

namespace detail {

inline bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    // Integral settings do not accept fractions or negative values.
    if (a.is_number_integer() || a.is_number_unsigned()) return b.is_number_unsigned() || (b.is_number_integer() && b.get<long long>() >= 0);
    return true;
  }
  return a.type() == b.type();
}

// Overlays `user` onto `base`, rejecting keys that `base` does not have.
inline void merge_strict(Json& base, const Json& user, const std::string& prefix) {
  if (!user.is_object()) throw InvalidConfig("config section '" + (prefix.empty() ? std::string("<root>") : prefix) + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw InvalidConfig("unknown config key '" + key + "'");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else if (slot.is_array()) {
      if (!it.value().is_array()) throw InvalidConfig("config key '" + key + "' must be an array");
      for (const auto& v : it.value())
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() > 0))
          throw InvalidConfig("config key '" + key + "' must hold positive integers");
      slot = it.value();
    } else {
      if (!same_kind(slot, it.value()))
        throw InvalidConfig("config key '" + key + "' has the wrong type (expected " + std::string(slot.type_name()) +
                            ", got " + std::string(it.value().type_name()) + ")");
      slot = it.value();
    }
  }
}

}  // namespace detail

inline RunConfig from_json(const Json& user) {
  Json merged = to_json(RunConfig{});
  detail::merge_strict(merged, user, "");
  RunConfig c;
  c.alpha = merged["alpha"];
  c.mu = merged["mu"];
  c.k = merged["k"];
  c.S = merged["S"];
  c.b = merged["b"];
  c.b_l = merged["b_l"];
  c.lr = merged["lr"];
  c.momentum = merged["momentum"];
  c.weight_decay = merged["weight_decay"];
  c.n_a = merged["n_a"];
  const auto& s = merged["solver"];
  c.cg_tol = s["cg_tol"];
  c.cg_max_iter = s["cg_max_iter"];
  c.degree_epsilon = s["degree_epsilon"];
  c.similarity = s["similarity"];
  const auto& a = merged["alignment"];
  c.align = a["enabled"];
  c.align_iterations = a["iterations"];
  c.align_clip_lo = a["clip_lo"];
  c.align_clip_hi = a["clip_hi"];
  c.prior = a["prior"];
  const auto& t = merged["training"];
  c.lr_horizon = t["lr_horizon"];
  c.init_epochs = t["init_epochs"];
  c.mixup = t["mixup"];
  c.augment = t["augment"];
  c.pseudo_labels = t["pseudo_labels"];
  const auto& m = merged["model"];
  c.hidden = m["hidden"].get<std::vector<std::size_t>>();
  c.l2_embedding = m["l2_embedding"];
  const auto& d = merged["data"];
  c.dataset = d["dataset"];
  c.n_train = d["n_train"];
  c.n_test = d["n_test"];
  c.n_labelled = d["n_labelled"];
  c.noise = d["noise"];
  c.stratified = d["stratified"];
  c.seed = merged["seed"];
  c.threads = merged["threads"];
  c.validate();
  return c;
}

inline RunConfig parse_config(const std::string& text, const std::string& source = "<string>") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidConfig(source + ": " + e.what());
  }
  return from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace detail {

// {"a": {"b": value}} for "a.b=value". The value is read as JSON when it
// parses, otherwise as a string.
inline Json override_patch(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidConfig("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
    parts.push_back(rest.substr(0, pos));
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = Json{{*it, patch}};
  return patch;
}

}  // namespace detail

// Applies "dotted.key=value" assignments in order, validating only the result.
inline RunConfig apply_overrides(const RunConfig& base, const std::vector<std::string>& assignments) {
  Json merged = to_json(base);
  for (const auto& a : assignments) detail::merge_strict(merged, detail::override_patch(a), "");
  return from_json(merged);
}

inline RunConfig apply_override(const RunConfig& base, const std::string& assignment) {
  return apply_overrides(base, {assignment});
}

}  // namespace gssl
