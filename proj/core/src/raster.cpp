#include "mtcd/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mtcd {

bool is_binary(const BinaryMask& mask) noexcept {
    return std::all_of(mask.pixels().begin(), mask.pixels().end(),
                       [](std::uint8_t v) { return v <= 1; });
}

void require_binary(const BinaryMask& mask, const char* what) {
    if (!is_binary(mask)) throw ValidationError(std::string(what) + ": mask is not binary");
}

namespace {

struct Tap {
    int i0, i1;
    float frac;
};

// Pixel-center aligned sampling positions along one axis.
std::vector<Tap> bilinear_taps(int src, int dst) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int d = 0; d < dst; ++d) {
        double pos = (d + 0.5) * scale - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
        const int i0 = static_cast<int>(std::floor(pos));
        const int i1 = std::min(i0 + 1, src - 1);
        taps[static_cast<std::size_t>(d)] = {i0, i1, static_cast<float>(pos - i0)};
    }
    return taps;
}

template <typename Out, typename In, typename Round>
Out bilinear(const In& src, int height, int width, Round round) {
    if (src.empty()) throw ShapeError("resize of an empty raster");
    if (height <= 0 || width <= 0) throw ShapeError("resize target must be positive");
    Out out(height, width);
    const auto ty = bilinear_taps(src.height(), height);
    const auto tx = bilinear_taps(src.width(), width);
    for (int y = 0; y < height; ++y) {
        const Tap& a = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            const Tap& b = tx[static_cast<std::size_t>(x)];
            const float top = src(a.i0, b.i0) * (1.0f - b.frac) + src(a.i0, b.i1) * b.frac;
            const float bot = src(a.i1, b.i0) * (1.0f - b.frac) + src(a.i1, b.i1) * b.frac;
            out(y, x) = round(top * (1.0f - a.frac) + bot * a.frac);
        }
    }
    return out;
}

template <typename G>
G flip(const G& src) {
    G out(src.height(), src.width());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x) out(y, x) = src(y, src.width() - 1 - x);
    return out;
}

} // namespace

GrayImage resize_bilinear(const GrayImage& src, int height, int width) {
    if (src.same_shape(height, width)) return src;
    return bilinear<GrayImage>(src, height, width, [](float v) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    });
}

RealImage resize_bilinear(const RealImage& src, int height, int width) {
    if (src.same_shape(height, width)) return src;
    return bilinear<RealImage>(src, height, width, [](float v) { return v; });
}

BinaryMask resize_nearest(const BinaryMask& src, int height, int width) {
    if (src.same_shape(height, width)) return src;
    if (src.empty()) throw ShapeError("resize of an empty mask");
    BinaryMask out(height, width);
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(src.height() - 1,
                                static_cast<int>((y + 0.5) * src.height() / height));
        for (int x = 0; x < width; ++x) {
            const int sx = std::min(src.width() - 1,
                                    static_cast<int>((x + 0.5) * src.width() / width));
            out(y, x) = src(sy, sx);
        }
    }
    return out;
}

GrayImage flip_horizontal(const GrayImage& src) { return flip(src); }
BinaryMask flip_horizontal(const BinaryMask& src) { return flip(src); }

RealImage to_unit_range(const GrayImage& src) {
    RealImage out(src.height(), src.width());
    std::transform(src.pixels().begin(), src.pixels().end(), out.pixels().begin(),
                   [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return out;
}

BinaryMask invert(const BinaryMask& mask) {
    BinaryMask out(mask.height(), mask.width());
    std::transform(mask.pixels().begin(), mask.pixels().end(), out.pixels().begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 0 : 1); });
    return out;
}

std::size_t count_ones(const BinaryMask& mask) noexcept {
    return static_cast<std::size_t>(std::count_if(mask.pixels().begin(), mask.pixels().end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

} // namespace mtcd
