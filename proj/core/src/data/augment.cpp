#include "mtcd/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtcd::data {

void AugmentPolicy::validate() const {
    if (multiplier != 5 && multiplier != 10)
        throw ParameterError("augmentation multiplier must be 5 or 10, got " + std::to_string(multiplier));
    for (double f : contrast_factors)
        if (!(f > 0)) throw ParameterError("contrast factors must be positive");
    if (multiplier == 10 && flips == Flips::none)
        throw ParameterError("a 10x augmentation needs horizontal flips");
    int non_identity = 0;
    for (double f : contrast_factors) non_identity += f != 1.0;
    if (non_identity < (flips == Flips::none ? 4 : 3))
        throw ParameterError("not enough non-identity contrast factors for a 5x augmentation");
}

GrayImage adjust_contrast(const GrayImage& image, double factor) {
    if (!(factor > 0)) throw ParameterError("contrast factor must be positive");
    if (factor == 1.0 || image.empty()) return image;
    double sum = 0;
    for (auto v : image.pixels()) sum += v;
    const double mean = sum / static_cast<double>(image.size());
    GrayImage out(image.height(), image.width());
    for (std::size_t k = 0; k < image.size(); ++k) {
        const double v = mean + factor * (image.pixels()[k] - mean);
        out.pixels()[k] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return out;
}

namespace {

EyeSample variant(const EyeSample& s, bool flip, double factor) {
    EyeSample out;
    out.image = adjust_contrast(flip ? flip_horizontal(s.image) : s.image, factor);
    if (s.mask) out.mask = flip ? flip_horizontal(*s.mask) : *s.mask;
    out.label_t1 = s.label_t1;
    out.label_t2 = s.label_t2;
    std::ostringstream id;
    id << s.sample_id << (flip ? "_flip" : "") << "_c" << factor;
    out.sample_id = id.str();
    return out;
}

} // namespace

std::vector<EyeSample> augment(const EyeSample& sample, const AugmentPolicy& policy) {
    policy.validate();
    if (sample.image.empty()) throw ValidationError("augment: sample has no image");
    std::vector<EyeSample> out;
    if (policy.multiplier == 10) {
        for (bool flip : {false, true})
            for (double f : policy.contrast_factors) out.push_back(variant(sample, flip, f));
        return out;
    }
    out.push_back(variant(sample, false, 1.0));
    const bool flips = policy.flips == AugmentPolicy::Flips::horizontal;
    if (flips) out.push_back(variant(sample, true, 1.0));
    for (double f : policy.contrast_factors) {
        if (out.size() == 5) break;
        if (f != 1.0) out.push_back(variant(sample, false, f));
    }
    return out;
}

} // namespace mtcd::data
