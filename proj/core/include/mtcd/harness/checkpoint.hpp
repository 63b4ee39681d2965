#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "mtcd/cls/multitask_net.hpp"
#include "mtcd/seg/pyramid_net.hpp"

namespace mtcd::harness {

/// A checkpoint is a JSON sidecar at `path` plus a weights blob next to it
/// with the extension replaced by ".weights".
std::filesystem::path weights_path_for(const std::filesystem::path& sidecar);

/// Writes both files. `extra` is merged into the sidecar (epoch, histories,
/// seed, ...); the config, kind, scalar type and weights digest are added here.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const seg::PyramidNet<T>& model,
                     const nlohmann::json& extra = nlohmann::json::object());
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const cls::MultitaskNet<T>& model,
                     const nlohmann::json& extra = nlohmann::json::object());

nlohmann::json read_sidecar(const std::filesystem::path& path);

/// Throws LoadError when the files are missing or describe another kind of
/// model or an incompatible architecture.
template <typename T>
std::unique_ptr<seg::PyramidNet<T>> load_segmentation(const std::filesystem::path& path,
                                                      nlohmann::json* sidecar = nullptr);
template <typename T>
std::unique_ptr<cls::MultitaskNet<T>> load_classifier(const std::filesystem::path& path,
                                                      nlohmann::json* sidecar = nullptr);

} // namespace mtcd::harness
