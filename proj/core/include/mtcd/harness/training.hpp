#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtcd/cls/multitask_net.hpp"
#include "mtcd/data/manifest.hpp"
#include "mtcd/harness/train_config.hpp"
#include "mtcd/metrics.hpp"
#include "mtcd/postprocess.hpp"
#include "mtcd/seg/pyramid_net.hpp"

namespace mtcd::harness {

// ---- segmentation -------------------------------------------------------

/// A sample at network resolution: image bilinear-resized to [0, 1], mask
/// nearest-resized.
struct SegExample {
    RealImage image;
    BinaryMask mask;
    std::string id;
};

/// Throws ValidationError if `require_masks` and a sample has no mask.
std::vector<SegExample> prepare_segmentation(const std::vector<data::EyeSample>& samples, int height,
                                             int width, bool require_masks = true);

struct SegEpoch {
    int epoch = 0;
    double train_loss = 0;
    std::optional<double> test_error;
    double seconds = 0;
};

struct SegHistory {
    std::vector<SegEpoch> epochs;
    int best_epoch = 0;
    std::optional<double> best_test_error;
    std::string rng_state_digest;  // shuffle generator after the last epoch
};

struct SegTrainResult {
    std::unique_ptr<seg::PyramidNet<float>> model;  // best-by-test-error weights, inference mode
    SegHistory history;
};

using SegEpochCallback = std::function<void(const SegEpoch&)>;

/// Mini-batch Adam on per-pixel cross-entropy. Each epoch visits the
/// (augmented) train split once in a seeded order and is scored on the test
/// split; the returned model holds the weights of the best test epoch, or of
/// the last epoch when there is no test split.
SegTrainResult train_segmentation(const data::Dataset& dataset, const seg::PyramidConfig& config,
                                  const TrainConfig& train, const SegEpochCallback& on_epoch = {});

/// Argmax masks at network resolution.
std::vector<BinaryMask> predict_masks(seg::PyramidNet<float>& model, const std::vector<RealImage>& images,
                                      int batch_size = 4);

SegEvalResult evaluate_segmentation(seg::PyramidNet<float>& model, const std::vector<SegExample>& examples,
                                    std::vector<BinaryMask>* predictions = nullptr, int batch_size = 4);

nlohmann::json history_json(const SegHistory& h);
std::string history_csv(const SegHistory& h);

// ---- classification -----------------------------------------------------

struct ClsExample {
    RealImage roi;  // kRoiSize square, [0, 1]
    int t1 = 0;     // 1 = unhealthy
    int t2 = 0;     // cls::T2Class
    bool empty_mask = false;
    std::string id;
};

/// Resize the image to (height, width), close the mask (already at that
/// size) and cut the ROI. The same steps run at inference time.
RoiResult roi_from_mask(const GrayImage& image, const BinaryMask& mask, const StructuringElement& se,
                        int roi_size = kRoiSize);

/// ROIs from ground-truth masks resized to `mask_size`.
std::vector<ClsExample> prepare_classification(const std::vector<data::EyeSample>& samples,
                                               const StructuringElement& se = {}, int mask_size = 224,
                                               int roi_size = kRoiSize);

struct ClsEpoch {
    int epoch = 0;
    double train_loss = 0;
    double train_bce = 0;
    double train_cce = 0;
    std::optional<double> test_t1_accuracy;
    std::optional<double> test_t2_accuracy;
    double seconds = 0;
};

struct ClsHistory {
    std::vector<ClsEpoch> epochs;
    int best_epoch = 0;
    std::string rng_state_digest;
};

struct ClsTrainResult {
    std::unique_ptr<cls::MultitaskNet<float>> model;  // best-by-test-T2 weights, inference mode
    ClsHistory history;
    std::optional<MultitaskEval> test_eval;
};

using ClsEpochCallback = std::function<void(const ClsEpoch&)>;

/// Joint training on lambda * BCE + CCE. Augmentation, if configured, is
/// applied to the ROIs (contrast and flips commute with ROI extraction up to
/// interpolation).
ClsTrainResult train_classifier(const std::vector<ClsExample>& train_set, const std::vector<ClsExample>& test_set,
                                const cls::ClassifierConfig& config, const TrainConfig& train,
                                const ClsEpochCallback& on_epoch = {});

struct ClsPredictions {
    std::vector<cls::MultitaskOutput> outputs;
    std::vector<std::vector<float>> features;  // pooled backbone features
};

ClsPredictions predict_classes(cls::MultitaskNet<float>& model, const std::vector<RealImage>& rois,
                               int batch_size = 8);
MultitaskEval evaluate_classifier(cls::MultitaskNet<float>& model, const std::vector<ClsExample>& examples,
                                  ClsPredictions* predictions = nullptr);

nlohmann::json history_json(const ClsHistory& h);
std::string history_csv(const ClsHistory& h);

// ---- ablation -----------------------------------------------------------

struct AblationRow {
    int level = 0;
    double seg_error = 0;
    int best_epoch = 0;
};

/// One model per structural level, each with the same seed and schedule.
/// Levels outside [2, n_blocks] are rejected before any training.
std::vector<AblationRow> run_ablation(const data::Dataset& dataset, const seg::PyramidConfig& base,
                                      const TrainConfig& train, const std::vector<int>& levels,
                                      const std::function<void(int level, const SegEpoch&)>& on_epoch = {});

} // namespace mtcd::harness
