#pragma once

#include <vector>

#include "gssl/trainer/trainer.hpp"

namespace gssl {

struct AblationSnapshot {
  double network_accuracy = 0.0;
  double graph_accuracy = 0.0;
};

// Both pseudo-label variants from one forward pass over unaugmented inputs.
inline AblationSnapshot compare_pseudo_labels(const Mlp& model, const RowMatrix& clean, const LabelSeed& seed,
                                              const std::vector<int>& truth, const RunConfig& cfg) {
  const auto out = model.forward(clean);
  RunConfig graph_cfg = cfg;
  graph_cfg.align = false;
  AblationSnapshot s;
  s.network_accuracy = label_accuracy(network_pseudo_labels(out.probs, seed).labels, truth, seed.unlabelled);
  s.graph_accuracy = label_accuracy(graph_pseudo_labels(out.embeddings, seed, graph_cfg).labels, truth, seed.unlabelled);
  return s;
}

struct AblationRow {
  std::size_t epoch = 0;
  double network_pl_accuracy = 0.0;
  double graph_pl_accuracy = 0.0;
  double network_test_error = std::numeric_limits<double>::quiet_NaN();
  double graph_test_error = std::numeric_limits<double>::quiet_NaN();
};

// Paired runs: pseudo-labels from argmax f(x) versus from the graph, both
// without distribution alignment and with n_a = 1, same seed and data.
inline std::vector<AblationRow> pseudo_label_ablation(RunConfig cfg, const TrainData& data) {
  cfg.align = false;
  cfg.n_a = 1;
  RunConfig net_cfg = cfg, graph_cfg = cfg;
  net_cfg.pseudo_labels = "network";
  graph_cfg.pseudo_labels = "graph";
  Trainer net(net_cfg, data), graph(graph_cfg, data);
  const auto a = net.train();
  const auto b = graph.train();
  std::vector<AblationRow> rows;
  for (std::size_t e = 0; e < std::min(a.metrics.size(), b.metrics.size()); ++e)
    rows.push_back({a.metrics[e].epoch, a.metrics[e].pl_accuracy, b.metrics[e].pl_accuracy, a.metrics[e].test_error,
                    b.metrics[e].test_error});
  return rows;
}

}  // namespace gssl
