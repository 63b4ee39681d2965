#pragma once

#include <filesystem>
#include <vector>

#include "mtcd/cls/multitask_net.hpp"
#include "mtcd/postprocess.hpp"
#include "mtcd/seg/pyramid_net.hpp"

namespace mtcd::harness {

/// Wall-clock seconds per stage. `total` is measured around all stages.
struct StageTimings {
    double load = 0;
    double preprocess = 0;
    double segment = 0;
    double postprocess = 0;
    double classify = 0;
    double total = 0;

    double stage_sum() const noexcept { return load + preprocess + segment + postprocess + classify; }
};

struct PipelineResult {
    BinaryMask raw_mask;  // argmax at network resolution
    BinaryMask mask;      // after closing
    RealImage roi;
    bool empty_mask = false;
    cls::MultitaskOutput output;
    std::vector<float> features;
    StageTimings timings;
};

/// Segment, close, cut the ROI and classify one eye image.
PipelineResult run_pipeline(const GrayImage& image, seg::PyramidNet<float>& segmenter,
                            cls::MultitaskNet<float>& classifier, const StructuringElement& se = {});

/// Same, reading the image and both checkpoints; `timings.load` covers the
/// reads.
PipelineResult run_pipeline(const std::filesystem::path& image, const std::filesystem::path& seg_checkpoint,
                            const std::filesystem::path& cls_checkpoint, const StructuringElement& se = {});

} // namespace mtcd::harness
