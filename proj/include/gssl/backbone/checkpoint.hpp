#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "gssl/backbone/mlp.hpp"
#include "gssl/backbone/sgd.hpp"
#include "gssl/core/error.hpp"
#include "gssl/graph/embedding.hpp"

namespace gssl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "LPCK", u32 version, u32 layer count, u32 embedding cut, u32 l2 flag,
// per layer (u64 out, u64 in), u64 step, float32 parameters (weights
// column-major then bias, layer by layer), float32 velocities in the same order.
inline void write_checkpoint(const std::string& path, const Mlp& model, const SgdState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open checkpoint for writing: " + path);
  out.write("LPCK", 4);
  detail::write_le<std::uint32_t>(out, kCheckpointVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers().size()));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.embed_cut()));
  detail::write_le<std::uint32_t>(out, model.l2_embedding() ? 1u : 0u);
  for (const auto& l : model.layers()) {
    detail::write_le<std::uint64_t>(out, l.out());
    detail::write_le<std::uint64_t>(out, l.in());
  }
  detail::write_le<std::uint64_t>(out, state.step);
  for (double v : model.flat_parameters()) detail::write_le<float>(out, static_cast<float>(v));
  const auto vel = state.velocity.empty() ? flatten(make_sgd_state(model).velocity) : flatten(state.velocity);
  for (double v : vel) detail::write_le<float>(out, static_cast<float>(v));
  if (!out) throw InputError("failed writing checkpoint: " + path);
}

struct Checkpoint {
  Mlp model;
  SgdState state;
};

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::string(magic, 4) != "LPCK") throw FormatError(path + ": missing LPCK header");
  const auto version = detail::read_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  const auto count = detail::read_le<std::uint32_t>(in, path);
  const auto cut = detail::read_le<std::uint32_t>(in, path);
  const auto l2 = detail::read_le<std::uint32_t>(in, path);
  if (count == 0 || cut + 1 != count) throw FormatError(path + ": inconsistent layer table");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rows = detail::read_le<std::uint64_t>(in, path);
    const auto cols = detail::read_le<std::uint64_t>(in, path);
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
      throw FormatError(path + ": implausible shape for layer " + std::to_string(i));
    layers.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows))});
  }
  Checkpoint ck;
  try {
    ck.model = Mlp(std::move(layers), l2 != 0);
  } catch (const InputError& e) {
    throw FormatError(path + ": " + e.what());
  }
  ck.state = make_sgd_state(ck.model);
  ck.state.step = detail::read_le<std::uint64_t>(in, path);
  const std::size_t n = ck.model.parameter_count();
  std::vector<double> params(n), vel(n);
  for (auto& v : params) v = detail::read_le<float>(in, path);
  for (auto& v : vel) v = detail::read_le<float>(in, path);
  ck.model.set_flat_parameters(params);
  std::size_t p = 0;
  for (auto& l : ck.state.velocity) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = vel[p++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = vel[p++];
  }
  return ck;
}

}  // namespace gssl
