#pragma once

#include <utility>
#include <vector>

#include "mtcd/raster.hpp"

namespace mtcd {

struct StructuringElement {
    enum class Shape { square, disk };

    Shape shape = Shape::square;
    int radius = 2;

    void validate() const;
    /// (dy, dx) offsets covered by the element, including (0, 0).
    std::vector<std::pair<int, int>> offsets() const;
};

/// Pixels outside the raster are ignored: dilation treats them as 0 and
/// erosion as 1. Both keep closing extensive at the borders.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
/// Dilation followed by erosion with the same element.
BinaryMask close(const BinaryMask& mask, const StructuringElement& se = {});

/// Inclusive-exclusive box [y0, y1) x [x0, x1).
struct Box {
    int y0 = 0, x0 = 0, y1 = 0, x1 = 0;
    int height() const noexcept { return y1 - y0; }
    int width() const noexcept { return x1 - x0; }
};

struct RoiResult {
    RealImage roi;     // out_size x out_size
    RealImage masked;  // image * mask at the input resolution
    Box crop;
    bool empty_mask = false;
};

inline constexpr int kRoiSize = 224;
inline constexpr double kRoiMargin = 0.10;

/// Multiplies the image by the mask, crops the mask's bounding box grown by
/// 10% per side (clamped to the image) and resizes it bilinearly. An empty
/// mask falls back to the centred min(h, w) square and sets `empty_mask`.
RoiResult extract_roi(const RealImage& image, const BinaryMask& mask, int out_size = kRoiSize);

} // namespace mtcd
