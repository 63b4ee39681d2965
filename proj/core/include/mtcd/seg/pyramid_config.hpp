#pragma once

#include <vector>

#include <nlohmann/json.hpp>

namespace mtcd::seg {

/// Shape of the segmentation network. A DenseNet-BC backbone with
/// `n_blocks` dense blocks, each block output reduced to two channels and
/// fused level by level back up to the input resolution.
struct PyramidConfig {
    int n_blocks = 5;
    std::vector<int> layers_per_block{1, 2, 4, 6, 6};
    int growth_rate = 20;
    int init_channels = 16;
    /// Transition output channels = floor(compression * input channels).
    double compression = 1.0;
    /// Bottleneck 1x1 width as a multiple of the growth rate.
    int bottleneck_factor = 4;
    int input_height = 224;
    int input_width = 224;
    /// Number of deep pyramids fused before prediction, in [2, n_blocks].
    int structural_levels = 5;

    /// Throws ParameterError describing the first violated invariant.
    void validate() const;

    /// Stem + two per dense layer + one per transition.
    int backbone_conv_count() const;

    /// Resolution of the block-i output (1-based) as (height, width).
    std::pair<int, int> block_resolution(int i) const;
};

void to_json(nlohmann::json& j, const PyramidConfig& c);
void from_json(const nlohmann::json& j, PyramidConfig& c);

} // namespace mtcd::seg
