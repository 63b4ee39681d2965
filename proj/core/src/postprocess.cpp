#include "mtcd/postprocess.hpp"

#include <algorithm>
#include <cmath>

namespace mtcd {

void StructuringElement::validate() const {
    if (radius < 1) throw ParameterError("structuring element radius must be at least 1");
}

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
    validate();
    std::vector<std::pair<int, int>> out;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (shape == Shape::square || dy * dy + dx * dx <= radius * radius) out.emplace_back(dy, dx);
    return out;
}

namespace {

// Sliding max (dilate) or min (erode) along rows then columns; a square is
// separable.
BinaryMask square_pass(const BinaryMask& m, int r, bool max_op) {
    const int h = m.height(), w = m.width();
    BinaryMask tmp(h, w), out(h, w);
    const std::uint8_t init = max_op ? 0 : 1;
    auto combine = [max_op](std::uint8_t a, std::uint8_t b) -> std::uint8_t {
        return max_op ? (a | b) : (a & b);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = init;
            for (int k = std::max(0, x - r); k <= std::min(w - 1, x + r); ++k) v = combine(v, m(y, k));
            tmp(y, x) = v;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = init;
            for (int k = std::max(0, y - r); k <= std::min(h - 1, y + r); ++k) v = combine(v, tmp(k, x));
            out(y, x) = v;
        }
    return out;
}

BinaryMask general_pass(const BinaryMask& m, const StructuringElement& se, bool max_op) {
    const auto offs = se.offsets();
    const int h = m.height(), w = m.width();
    BinaryMask out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = max_op ? 0 : 1;
            for (const auto& [dy, dx] : offs) {
                const int yy = y + dy, xx = x + dx;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                v = max_op ? (v | m(yy, xx)) : (v & m(yy, xx));
            }
            out(y, x) = v;
        }
    return out;
}

BinaryMask morph(const BinaryMask& m, const StructuringElement& se, bool max_op) {
    se.validate();
    require_binary(m, "morphology input");
    if (se.shape == StructuringElement::Shape::square) return square_pass(m, se.radius, max_op);
    return general_pass(m, se, max_op);
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) { return morph(mask, se, true); }

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) { return morph(mask, se, false); }

BinaryMask close(const BinaryMask& mask, const StructuringElement& se) { return erode(dilate(mask, se), se); }

RoiResult extract_roi(const RealImage& image, const BinaryMask& mask, int out_size) {
    if (!image.same_shape(mask))
        throw ShapeError("extract_roi: image and mask shapes differ");
    if (image.empty()) throw ShapeError("extract_roi: empty image");
    if (out_size < 1) throw ParameterError("extract_roi: output size must be positive");
    require_binary(mask, "extract_roi mask");

    const int h = image.height(), w = image.width();
    RoiResult r;
    r.masked = RealImage(h, w);
    int y0 = h, x0 = w, y1 = -1, x1 = -1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            r.masked(y, x) = image(y, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
        }

    if (y1 < 0) {
        r.empty_mask = true;
        const int s = std::min(h, w);
        r.crop = {(h - s) / 2, (w - s) / 2, (h - s) / 2 + s, (w - s) / 2 + s};
    } else {
        const int my = static_cast<int>(std::lround(kRoiMargin * (y1 - y0 + 1)));
        const int mx = static_cast<int>(std::lround(kRoiMargin * (x1 - x0 + 1)));
        r.crop = {std::max(0, y0 - my), std::max(0, x0 - mx), std::min(h, y1 + 1 + my), std::min(w, x1 + 1 + mx)};
    }

    RealImage crop(r.crop.height(), r.crop.width());
    for (int y = 0; y < crop.height(); ++y)
        for (int x = 0; x < crop.width(); ++x) crop(y, x) = r.masked(r.crop.y0 + y, r.crop.x0 + x);
    r.roi = resize_bilinear(crop, out_size, out_size);
    return r;
}

} // namespace mtcd
