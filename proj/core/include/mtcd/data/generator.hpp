#pragma once

#include <cstdint>

#include "mtcd/data/sample.hpp"

namespace mtcd::data {

enum class Condition { healthy, pre_cataract, post_cataract };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

/// Geometry is in continuous pixel coordinates: pixel (y, x) covers
/// [x, x + 1) x [y, y + 1) and is inside a circle when its centre is. The iris
/// is centred at (width / 2 + center_dx, height / 2 + center_dy).
struct EyeGenParams {
    int canvas_height = 240;
    int canvas_width = 320;
    double pupil_radius_fraction = 0.4;
    int iris_radius_px = 56;
    Condition condition = Condition::healthy;
    /// 0 leaves the iris fully visible; 1 lowers the upper lid to the iris centre.
    double eyelid_droop = 0.2;
    int specular_count = 2;
    /// Scales the pupil between 0.7x (contracted) and 1.3x (dilated) of
    /// pupil_radius_fraction * iris_radius_px.
    double dilation_level = 0.5;
    std::uint64_t rng_seed = 0;
    double center_dx = 0;
    double center_dy = 0;

    double center_x() const noexcept { return canvas_width / 2.0 + center_dx; }
    double center_y() const noexcept { return canvas_height / 2.0 + center_dy; }
    double pupil_radius() const noexcept;
    /// Height of the upper-lid parabola above the iris centre at dx = 0.
    double upper_lid_height() const noexcept;
    /// Half-width of the eye opening.
    double opening_half_width() const noexcept;
    /// True where the upper lid covers the point (px, py).
    bool occluded(double px, double py) const noexcept;

    /// Throws ParameterError for out-of-range fields or a pupil that is not
    /// strictly inside the iris.
    void validate() const;
};

/// Renders a near-infrared eye: textured iris annulus, dark pupil (clouded and
/// bright for pre_cataract; lens ring and iris punctures for post_cataract),
/// bright sclera, skin, an upper-lid occluder and specular highlights. The mask
/// is 1 on the iris disk minus lid-covered pixels. Deterministic in params.
EyeSample generate_eye(const EyeGenParams& params);

} // namespace mtcd::data
