#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtcd/error.hpp"

namespace mtcd {

/// Row-major single-channel 2-D grid. The tag keeps images and masks from
/// being mixed up at compile time.
template <typename Pixel, typename Tag>
class Grid {
public:
    using value_type = Pixel;

    Grid() = default;
    Grid(int height, int width, Pixel fill = Pixel{})
        : height_(height), width_(width),
          pixels_(static_cast<std::size_t>(checked(height, width)), fill) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    Pixel& operator()(int y, int x) noexcept { return pixels_[index(y, x)]; }
    const Pixel& operator()(int y, int x) const noexcept { return pixels_[index(y, x)]; }

    Pixel* data() noexcept { return pixels_.data(); }
    const Pixel* data() const noexcept { return pixels_.data(); }
    std::vector<Pixel>& pixels() noexcept { return pixels_; }
    const std::vector<Pixel>& pixels() const noexcept { return pixels_; }

    bool same_shape(int h, int w) const noexcept { return height_ == h && width_ == w; }
    template <typename P2, typename T2>
    bool same_shape(const Grid<P2, T2>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.pixels_ == b.pixels_;
    }

private:
    static long checked(int h, int w) {
        if (h < 0 || w < 0) throw ShapeError("negative raster dimensions");
        return static_cast<long>(h) * w;
    }
    std::size_t index(int y, int x) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<Pixel> pixels_;
};

struct GrayTag;
struct MaskTag;
struct RealTag;

/// 8-bit grayscale intensities.
using GrayImage = Grid<std::uint8_t, GrayTag>;
/// Binary raster holding only 0 and 1.
using BinaryMask = Grid<std::uint8_t, MaskTag>;
/// Real-valued raster, typically intensities normalized to [0,1].
using RealImage = Grid<float, RealTag>;

bool is_binary(const BinaryMask& mask) noexcept;

/// Throws ValidationError unless every pixel is 0 or 1.
void require_binary(const BinaryMask& mask, const char* what);

GrayImage resize_bilinear(const GrayImage& src, int height, int width);
RealImage resize_bilinear(const RealImage& src, int height, int width);
BinaryMask resize_nearest(const BinaryMask& src, int height, int width);

GrayImage flip_horizontal(const GrayImage& src);
BinaryMask flip_horizontal(const BinaryMask& src);

/// Intensities scaled to [0,1].
RealImage to_unit_range(const GrayImage& src);

BinaryMask invert(const BinaryMask& mask);
std::size_t count_ones(const BinaryMask& mask) noexcept;

} // namespace mtcd
