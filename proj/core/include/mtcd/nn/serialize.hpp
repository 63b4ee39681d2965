#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mtcd/nn/layer.hpp"

namespace mtcd::nn {

/// Writes every parameter and buffer of `reg` with its name and shape.
/// Values keep the model's scalar type, so a round trip is bit-exact.
template <typename T>
void save_weights(const std::filesystem::path& path, const StateRegistry<T>& reg);

/// Restores tensors by name. With an empty `prefix` the blob must cover the
/// registry exactly; otherwise only registry entries whose names start with
/// `prefix` are required and other blob entries are ignored. A blob written
/// at a different precision is converted.
template <typename T>
void load_weights(const std::filesystem::path& path, const StateRegistry<T>& reg,
                  const std::string& prefix = "");

/// FNV-1a over names and raw bytes of every parameter and buffer.
template <typename T>
std::string weights_digest(const StateRegistry<T>& reg);

/// In-memory copy of every parameter and buffer, in registry order.
template <typename T>
using StateSnapshot = std::vector<Tensor<T>>;

template <typename T>
StateSnapshot<T> capture_state(const StateRegistry<T>& reg) {
    StateSnapshot<T> snap;
    for (const auto& p : reg.parameters()) snap.push_back(p.param->value);
    for (const auto& b : reg.buffers()) snap.push_back(*b.tensor);
    return snap;
}

template <typename T>
void restore_state(const StateRegistry<T>& reg, const StateSnapshot<T>& snap) {
    if (snap.size() != reg.parameters().size() + reg.buffers().size())
        throw ShapeError("snapshot does not match the model");
    std::size_t k = 0;
    for (const auto& p : reg.parameters()) p.param->value = snap[k++];
    for (const auto& b : reg.buffers()) *b.tensor = snap[k++];
}

} // namespace mtcd::nn
