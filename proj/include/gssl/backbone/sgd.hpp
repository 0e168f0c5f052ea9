#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "gssl/backbone/mlp.hpp"
#include "gssl/core/error.hpp"

namespace gssl {

struct SgdConfig {
  double lr = 0.03;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t horizon = 255000;
  bool nesterov = true;

  void validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidConfig("lr must be finite and nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidConfig("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw InvalidConfig("weight_decay must be nonnegative");
    if (horizon == 0) throw InvalidConfig("lr horizon must be positive");
  }

  // lr(s) = lr cos(pi/2 min(s, H) / H); exactly zero from H on.
  double learning_rate(std::uint64_t step) const {
    if (step >= horizon) return 0.0;
    return lr * std::cos(0.5 * std::numbers::pi * static_cast<double>(step) / static_cast<double>(horizon));
  }
};

struct SgdState {
  Gradients velocity;
  std::uint64_t step = 0;
};

inline SgdState make_sgd_state(const Mlp& model) {
  SgdState s;
  for (const auto& l : model.layers())
    s.velocity.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                          Eigen::VectorXd::Zero(l.bias.size())});
  return s;
}

// g <- g + wd theta; v <- m v + g; theta <- theta - lr (g + m v) for Nesterov,
// theta <- theta - lr v otherwise. Returns the learning rate used.
inline double sgd_step(Mlp& model, const Gradients& grads, const SgdConfig& cfg, SgdState& state) {
  auto& layers = model.layers();
  if (grads.size() != layers.size() || state.velocity.size() != layers.size())
    throw InputError("sgd_step: gradient or velocity shapes do not match the model");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].weight.rows() != layers[i].weight.rows() || grads[i].weight.cols() != layers[i].weight.cols() ||
        grads[i].bias.size() != layers[i].bias.size())
      throw InputError("sgd_step: gradient shape mismatch at layer " + std::to_string(i));
    if (!grads[i].weight.allFinite() || !grads[i].bias.allFinite())
      throw NumericalError("sgd_step: non-finite gradient at layer " + std::to_string(i) + ", step " +
                           std::to_string(state.step));
  }
  const double lr = cfg.learning_rate(state.step);
  const double m = cfg.momentum;
  const auto update = [&](auto& theta, const auto& g_raw, auto& v) {
    const auto g = (g_raw + cfg.weight_decay * theta).eval();
    v = m * v + g;
    if (cfg.nesterov)
      theta -= lr * (g + m * v);
    else
      theta -= lr * v;
  };
  for (std::size_t i = 0; i < grads.size(); ++i) {
    update(layers[i].weight, grads[i].weight, state.velocity[i].weight);
    update(layers[i].bias, grads[i].bias, state.velocity[i].bias);
  }
  ++state.step;
  return lr;
}

}  // namespace gssl
