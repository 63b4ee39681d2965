#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtcd/raster.hpp"

namespace mtcd {

/// Average per-pixel XOR disagreement between ground-truth and predicted masks.
struct SegEvalResult {
    double error = 0;
    std::vector<double> per_sample_errors;
    std::size_t n = 0;
    int m = 0;       // mask height
    int n_cols = 0;  // mask width
    std::uint64_t disagreeing_pixels = 0;
};

/// error = disagreeing / (N * m * n), computed from exact integer counts.
SegEvalResult seg_error(const std::vector<BinaryMask>& gt, const std::vector<BinaryMask>& pred);

/// Per-class and macro-averaged classification metrics for one task.
/// Undefined ratios (zero denominators) are empty rather than 0.
struct ClsEvalResult {
    std::vector<std::string> class_names;
    std::size_t total = 0;
    double accuracy = 0;
    std::vector<std::optional<double>> precision, recall, f1;
    std::vector<std::size_t> support;  // samples per actual class
    /// Mean over the classes where the value is defined.
    std::optional<double> macro_precision, macro_recall, macro_f1;
    std::vector<std::vector<std::size_t>> confusion;  // rows = actual, cols = predicted
    /// Each row divided by its sum; rows without samples are empty.
    std::vector<std::vector<std::optional<double>>> confusion_normalized;
};

ClsEvalResult classification_eval(const std::vector<int>& preds, const std::vector<int>& labels,
                                  std::vector<std::string> class_names);

struct MultitaskEval {
    ClsEvalResult t1;
    ClsEvalResult t2;
};

/// T1 classes: 0 healthy, 1 unhealthy. T2 classes: 0 pre_cataract,
/// 1 post_cataract, 2 others.
MultitaskEval cls_eval(const std::vector<int>& preds_t1, const std::vector<int>& labels_t1,
                       const std::vector<int>& preds_t2, const std::vector<int>& labels_t2);

void to_json(nlohmann::json& j, const SegEvalResult& r);
void to_json(nlohmann::json& j, const ClsEvalResult& r);
void to_json(nlohmann::json& j, const MultitaskEval& r);

} // namespace mtcd
