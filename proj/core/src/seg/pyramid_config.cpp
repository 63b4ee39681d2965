#include "mtcd/seg/pyramid_config.hpp"

#include <numeric>
#include <string>

#include "mtcd/error.hpp"

namespace mtcd::seg {

void PyramidConfig::validate() const {
    if (n_blocks < 2) throw ParameterError("n_blocks must be at least 2");
    if (static_cast<int>(layers_per_block.size()) != n_blocks)
        throw ParameterError("layers_per_block must have n_blocks entries");
    for (int l : layers_per_block)
        if (l < 1) throw ParameterError("every dense block needs at least one layer");
    if (growth_rate < 1) throw ParameterError("growth_rate must be positive");
    if (init_channels < 1) throw ParameterError("init_channels must be positive");
    if (!(compression > 0.0 && compression <= 1.0)) throw ParameterError("compression must lie in (0, 1]");
    if (bottleneck_factor < 1) throw ParameterError("bottleneck_factor must be positive");
    if (structural_levels < 2 || structural_levels > n_blocks)
        throw ParameterError("structural_levels must lie in [2, n_blocks], got " +
                             std::to_string(structural_levels));
    const int div = 1 << (n_blocks - 1);
    if (input_height <= 0 || input_width <= 0 || input_height % div != 0 || input_width % div != 0)
        throw ParameterError("input size must be a positive multiple of 2^(n_blocks-1) = " +
                             std::to_string(div));
}

int PyramidConfig::backbone_conv_count() const {
    return 1 + 2 * std::accumulate(layers_per_block.begin(), layers_per_block.end(), 0) + (n_blocks - 1);
}

std::pair<int, int> PyramidConfig::block_resolution(int i) const {
    return {input_height >> (i - 1), input_width >> (i - 1)};
}

void to_json(nlohmann::json& j, const PyramidConfig& c) {
    j = nlohmann::json{{"n_blocks", c.n_blocks},
                       {"layers_per_block", c.layers_per_block},
                       {"growth_rate", c.growth_rate},
                       {"init_channels", c.init_channels},
                       {"compression", c.compression},
                       {"bottleneck_factor", c.bottleneck_factor},
                       {"input_size", {c.input_height, c.input_width}},
                       {"structural_levels", c.structural_levels}};
}

void from_json(const nlohmann::json& j, PyramidConfig& c) {
    PyramidConfig d;
    c.n_blocks = j.value("n_blocks", d.n_blocks);
    c.layers_per_block = j.value("layers_per_block", d.layers_per_block);
    c.growth_rate = j.value("growth_rate", d.growth_rate);
    c.init_channels = j.value("init_channels", d.init_channels);
    c.compression = j.value("compression", d.compression);
    c.bottleneck_factor = j.value("bottleneck_factor", d.bottleneck_factor);
    if (j.contains("input_size")) {
        c.input_height = j.at("input_size").at(0).get<int>();
        c.input_width = j.at("input_size").at(1).get<int>();
    }
    c.structural_levels = j.value("structural_levels", c.n_blocks);
}

} // namespace mtcd::seg
