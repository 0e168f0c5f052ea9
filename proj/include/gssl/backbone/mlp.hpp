#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gssl/backbone/loss.hpp"
#include "gssl/core/error.hpp"
#include "gssl/core/random.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{128, 128};
  std::size_t classes = 0;
  bool l2_embedding = true;

  void validate() const {
    if (input_dim == 0) throw InvalidConfig("input_dim must be positive");
    if (classes < 2) throw InvalidConfig("classes must be at least 2");
    for (auto h : hidden)
      if (h == 0) throw InvalidConfig("hidden layer width must be positive");
  }
};

// Affine layer y = x W^T + b. W is out x in.
struct Layer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  std::size_t in() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(weight.size() + bias.size()); }
};

using Gradients = std::vector<Layer>;

struct ForwardResult {
  RowMatrix embeddings;
  RowMatrix logits;
  RowMatrix probs;
};

// Intermediate values kept for backpropagation.
struct ForwardCache {
  std::vector<RowMatrix> inputs;       // input to each layer
  std::vector<RowMatrix> pre;          // pre-activation of each layer
  RowMatrix unnormalized_embedding;    // before l2 normalisation
  Eigen::VectorXd embedding_norms;
};

// f = g o z. Hidden layers use ReLU; z is the output of the last hidden
// layer, optionally scaled to unit norm; g is a single linear layer.
class Mlp {
 public:
  Mlp() = default;

  Mlp(const MlpSpec& spec, Rng& rng) : l2_embedding_(spec.l2_embedding) {
    spec.validate();
    std::size_t in = spec.input_dim;
    std::vector<std::size_t> widths = spec.hidden;
    widths.push_back(spec.classes);
    for (std::size_t out : widths) {
      Layer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
      const double bound = std::sqrt(6.0 / static_cast<double>(in));
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = uniform(rng, -bound, bound);
      layers_.push_back(std::move(layer));
      in = out;
    }
  }

  Mlp(std::vector<Layer> layers, bool l2_embedding) : layers_(std::move(layers)), l2_embedding_(l2_embedding) {
    if (layers_.empty()) throw InputError("network needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].bias.size() != layers_[i].weight.rows())
        throw InputError("layer " + std::to_string(i) + ": bias size does not match weight rows");
      if (i > 0 && layers_[i].in() != layers_[i - 1].out())
        throw InputError("layer " + std::to_string(i) + ": input width does not match previous layer");
    }
  }

  std::size_t input_dim() const { return layers_.front().in(); }
  std::size_t classes() const { return layers_.back().out(); }
  std::size_t embedding_dim() const { return layers_.size() > 1 ? layers_[layers_.size() - 2].out() : input_dim(); }
  std::size_t embed_cut() const { return layers_.size() - 1; }
  bool l2_embedding() const { return l2_embedding_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.parameter_count();
    return n;
  }

  ForwardResult forward(const RowMatrix& x, ForwardCache* cache = nullptr) const {
    if (static_cast<std::size_t>(x.cols()) != input_dim())
      throw InputError("input width " + std::to_string(x.cols()) + " does not match network input " +
                       std::to_string(input_dim()));
    if (cache) *cache = {};
    RowMatrix h = x;
    const std::size_t cut = embed_cut();
    for (std::size_t i = 0; i < cut; ++i) {
      RowMatrix pre = affine(layers_[i], h);
      if (cache) {
        cache->inputs.push_back(std::move(h));
        cache->pre.push_back(pre);
      }
      h = pre.cwiseMax(0.0);
    }
    ForwardResult out;
    if (l2_embedding_) {
      Eigen::VectorXd norms = h.rowwise().norm();
      out.embeddings = h;
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        if (norms[r] > 0.0) out.embeddings.row(r) /= norms[r];
      if (cache) {
        cache->unnormalized_embedding = h;
        cache->embedding_norms = std::move(norms);
      }
    } else {
      out.embeddings = h;
    }
    if (cache) cache->inputs.push_back(out.embeddings);
    out.logits = affine(layers_.back(), out.embeddings);
    out.probs = softmax(out.logits);
    return out;
  }

  // Gradient of the mean soft-target cross-entropy with respect to every
  // parameter. `probs` come from the forward pass that filled `cache`.
  Gradients backward(const ForwardCache& cache, const RowMatrix& probs, const RowMatrix& targets) const {
    detail::check_targets(probs.rows(), probs.cols(), targets);
    const double batch = static_cast<double>(probs.rows());
    Gradients grads(layers_.size());
    RowMatrix delta = (probs.array().colwise() * targets.rowwise().sum().array() - targets.array()) / batch;

    const std::size_t last = layers_.size() - 1;
    accumulate(grads[last], delta, cache.inputs[last]);
    RowMatrix d_h = delta * layers_[last].weight;

    if (l2_embedding_) {
      const RowMatrix& e = cache.inputs[last];
      for (Eigen::Index r = 0; r < d_h.rows(); ++r) {
        const double norm = cache.embedding_norms[r];
        if (norm > 0.0) {
          d_h.row(r) = (d_h.row(r) - e.row(r) * e.row(r).dot(d_h.row(r))) / norm;
        } else {
          d_h.row(r).setZero();
        }
      }
    }
    for (std::size_t i = last; i-- > 0;) {
      delta = d_h.array() * (cache.pre[i].array() > 0.0).cast<double>();
      accumulate(grads[i], delta, cache.inputs[i]);
      if (i > 0) d_h = delta * layers_[i].weight;
    }
    return grads;
  }

  // Loss and gradients for one batch.
  double loss_and_gradients(const RowMatrix& x, const RowMatrix& targets, Gradients& grads) const {
    ForwardCache cache;
    const auto out = forward(x, &cache);
    grads = backward(cache, out.probs, targets);
    return cross_entropy_from_logits(out.logits, targets);
  }

  std::vector<double> flat_parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& l : layers_) {
      out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
      out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
    }
    return out;
  }

  void set_flat_parameters(const std::vector<double>& flat) {
    if (flat.size() != parameter_count()) throw InputError("parameter vector has the wrong length");
    std::size_t p = 0;
    for (auto& l : layers_) {
      std::copy_n(flat.data() + p, l.weight.size(), l.weight.data());
      p += static_cast<std::size_t>(l.weight.size());
      std::copy_n(flat.data() + p, l.bias.size(), l.bias.data());
      p += static_cast<std::size_t>(l.bias.size());
    }
  }

  bool all_finite() const {
    for (const auto& l : layers_)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

 private:
  static RowMatrix affine(const Layer& layer, const RowMatrix& x) {
    RowMatrix y = x * layer.weight.transpose();
    y.rowwise() += layer.bias.transpose();
    return y;
  }

  static void accumulate(Layer& grad, const RowMatrix& delta, const RowMatrix& input) {
    grad.weight = delta.transpose() * input;
    grad.bias = delta.colwise().sum().transpose();
  }

  std::vector<Layer> layers_;
  bool l2_embedding_ = true;
};

inline std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  for (const auto& l : grads) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

}  // namespace gssl
