#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "mtcd/data/augment.hpp"

namespace mtcd::data {

void to_json(nlohmann::json& j, const AugmentPolicy& p);
void from_json(const nlohmann::json& j, AugmentPolicy& p);

} // namespace mtcd::data

namespace mtcd::harness {

enum class Task { segmentation, classification };

struct TrainConfig {
    Task task = Task::segmentation;
    int epochs = 60;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 4;
    double lambda = 0.5;  // classification only
    std::uint64_t seed = 0;
    /// Empty trains on the raw split.
    std::optional<data::AugmentPolicy> augment;

    /// 60 epochs at 1e-3 for segmentation, 100 at 1e-5 for classification,
    /// batch 4, 10x augmentation for segmentation and 5x for classification.
    static TrainConfig defaults(Task task);
    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

TrainConfig read_train_config(const std::filesystem::path& path);

} // namespace mtcd::harness
