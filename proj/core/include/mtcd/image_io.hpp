#pragma once

#include <filesystem>

#include "mtcd/raster.hpp"

namespace mtcd {

/// Decodes a PNG into 8-bit grayscale. Color inputs are converted, 16-bit
/// inputs are reduced to 8 bits. Throws LoadError naming the path on failure.
GrayImage read_png(const std::filesystem::path& path);

/// Writes an 8-bit single-channel PNG. Throws IoError on failure.
void write_png(const std::filesystem::path& path, const GrayImage& image);

/// Mask stored as 0/255; reading thresholds at 128.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_png(const std::filesystem::path& path);

BinaryMask threshold(const GrayImage& image, std::uint8_t level = 128);
GrayImage mask_to_gray(const BinaryMask& mask);

/// RGB8 raster used for plots.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

    RgbImage() = default;
    RgbImage(int h, int w, std::uint8_t fill = 255)
        : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, fill) {}
    void set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (y < 0 || x < 0 || y >= height || x >= width) return;
        auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

void write_png(const std::filesystem::path& path, const RgbImage& image);

} // namespace mtcd
