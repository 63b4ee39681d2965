#pragma once

#include <optional>
#include <string>

#include "mtcd/raster.hpp"

namespace mtcd::data {

enum class T1Label { healthy = 0, unhealthy = 1 };
enum class T2Label { pre_cataract = 0, post_cataract = 1, others = 2 };

std::string to_string(T1Label label);
std::string to_string(T2Label label);
T1Label t1_from_string(const std::string& s);
T2Label t2_from_string(const std::string& s);

/// The T1 label implied by a T2 label.
T1Label implied_t1(T2Label t2) noexcept;

struct EyeSample {
    GrayImage image;
    std::optional<BinaryMask> mask;  // 1 = visible iris or pupil
    std::optional<T1Label> label_t1;
    std::optional<T2Label> label_t2;
    std::string sample_id;

    /// Throws ValidationError when the mask does not match the image or is not
    /// binary, or when the two labels contradict each other.
    void validate() const;
};

} // namespace mtcd::data
