#pragma once

#include <array>
#include <vector>

#include "mtcd/data/sample.hpp"

namespace mtcd::data {

struct AugmentPolicy {
    enum class Flips { none, horizontal };

    std::array<double, 5> contrast_factors{0.6, 0.8, 1.0, 1.2, 1.4};
    Flips flips = Flips::horizontal;
    int multiplier = 10;

    void validate() const;
};

/// out = clamp(mean + factor * (in - mean)) with the image's own mean.
GrayImage adjust_contrast(const GrayImage& image, double factor);

/// multiplier 10: {original, flipped} x every contrast factor, unflipped
/// first. multiplier 5: original, flipped, then the first three non-identity
/// factors (without flips: original and four non-identity factors). Masks
/// follow the flips only; labels are copied.
std::vector<EyeSample> augment(const EyeSample& sample, const AugmentPolicy& policy);

} // namespace mtcd::data
