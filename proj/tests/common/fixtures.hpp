#pragma once

#include <random>
#include <vector>

#include "mtcd/cls/multitask_net.hpp"
#include "mtcd/seg/pyramid_net.hpp"

namespace fixtures {

/// A pyramid small enough for finite differences.
inline mtcd::seg::PyramidConfig tiny_pyramid(int n_blocks, int size, int levels = 0) {
    mtcd::seg::PyramidConfig c;
    c.n_blocks = n_blocks;
    c.layers_per_block.assign(static_cast<std::size_t>(n_blocks), 1);
    c.growth_rate = 2;
    c.init_channels = 3;
    c.bottleneck_factor = 1;
    c.input_height = size;
    c.input_width = size;
    c.structural_levels = levels > 0 ? levels : n_blocks;
    return c;
}

inline mtcd::cls::ClassifierConfig tiny_classifier(int size, int width = 2) {
    mtcd::cls::ClassifierConfig c;
    c.backbone = mtcd::cls::BackboneKind::small_scratch;
    c.scratch_width = width;
    c.head_t1_widths = {3};
    c.input_height = size;
    c.input_width = size;
    return c;
}

template <typename T>
mtcd::nn::Tensor<T> random_images(int n, int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mtcd::nn::Tensor<T> t(n, 1, h, w);
    for (auto& v : t.values()) v = static_cast<T>(u(rng));
    return t;
}

/// Disk masks at random centres, one per image.
inline std::vector<mtcd::BinaryMask> random_disks(int n, int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.3, 0.7);
    std::vector<mtcd::BinaryMask> out;
    for (int k = 0; k < n; ++k) {
        const double cy = u(rng) * h, cx = u(rng) * w, r = 0.3 * std::min(h, w);
        mtcd::BinaryMask m(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
                m(y, x) = dy * dy + dx * dx <= r * r ? 1 : 0;
            }
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace fixtures
