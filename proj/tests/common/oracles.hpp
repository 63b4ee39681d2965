// Independent reference implementations. Nothing here calls the library
// routine it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mtcd/nn/layer.hpp"
#include "mtcd/raster.hpp"

namespace oracle {

inline mtcd::BinaryMask random_mask(int h, int w, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution bit(p);
    mtcd::BinaryMask m(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m(y, x) = bit(rng) ? 1 : 0;
    return m;
}

struct XorCount {
    std::uint64_t disagree = 0;
    std::uint64_t total = 0;
    double error() const { return static_cast<double>(disagree) / static_cast<double>(total); }
};

/// Straight double loop over images and pixels.
inline XorCount xor_error(const std::vector<mtcd::BinaryMask>& gt, const std::vector<mtcd::BinaryMask>& pred) {
    XorCount c;
    for (std::size_t k = 0; k < gt.size(); ++k)
        for (int y = 0; y < gt[k].height(); ++y)
            for (int x = 0; x < gt[k].width(); ++x) {
                c.disagree += (gt[k](y, x) != pred[k](y, x)) ? 1 : 0;
                ++c.total;
            }
    return c;
}

/// Square window of side 2r+1 scanned pixel by pixel. Outside pixels do not
/// take part: max over an empty set of inside pixels never happens because the
/// centre is always inside.
inline mtcd::BinaryMask window_dilate(const mtcd::BinaryMask& m, int r) {
    mtcd::BinaryMask out(m.height(), m.width());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            int v = 0;
            for (int yy = y - r; yy <= y + r; ++yy)
                for (int xx = x - r; xx <= x + r; ++xx)
                    if (yy >= 0 && yy < m.height() && xx >= 0 && xx < m.width()) v = std::max<int>(v, m(yy, xx));
            out(y, x) = static_cast<std::uint8_t>(v);
        }
    return out;
}

inline mtcd::BinaryMask window_erode(const mtcd::BinaryMask& m, int r) {
    mtcd::BinaryMask out(m.height(), m.width());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            int v = 1;
            for (int yy = y - r; yy <= y + r; ++yy)
                for (int xx = x - r; xx <= x + r; ++xx)
                    if (yy >= 0 && yy < m.height() && xx >= 0 && xx < m.width()) v = std::min<int>(v, m(yy, xx));
            out(y, x) = static_cast<std::uint8_t>(v);
        }
    return out;
}

inline mtcd::BinaryMask window_close(const mtcd::BinaryMask& m, int r) { return window_erode(window_dilate(m, r), r); }

/// out[y][x] = in[y / 2][x / 2] for one (sample, channel) plane stored row-major.
template <typename T>
std::vector<T> upsample_nearest(const std::vector<T>& in, int h, int w) {
    std::vector<T> out(static_cast<std::size_t>(4 * h * w));
    for (int y = 0; y < 2 * h; ++y)
        for (int x = 0; x < 2 * w; ++x) out[static_cast<std::size_t>(y * 2 * w + x)] = in[static_cast<std::size_t>((y / 2) * w + x / 2)];
    return out;
}

/// Zero-padded "same" convolution, cross-correlation form, weight (out, in, k, k).
inline std::vector<double> conv_same(const std::vector<double>& x, int n, int cin, int h, int w,
                                     const std::vector<double>& wt, const std::vector<double>& bias, int cout, int k) {
    const int p = k / 2;
    std::vector<double> y(static_cast<std::size_t>(n * cout * h * w), 0.0);
    for (int s = 0; s < n; ++s)
        for (int o = 0; o < cout; ++o)
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(o)];
                    for (int i = 0; i < cin; ++i)
                        for (int dy = 0; dy < k; ++dy)
                            for (int dx = 0; dx < k; ++dx) {
                                const int sy = yy + dy - p, sx = xx + dx - p;
                                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                                acc += wt[static_cast<std::size_t>(((o * cin + i) * k + dy) * k + dx)] *
                                       x[static_cast<std::size_t>(((s * cin + i) * h + sy) * w + sx)];
                            }
                    y[static_cast<std::size_t>(((s * cout + o) * h + yy) * w + xx)] = acc;
                }
    return y;
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps parameters whose gradient
/// is numerically zero from dividing noise by noise.
inline double rel_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct GradCheck {
    double max_rel = 0;
    std::size_t checked = 0;
    std::string worst;
};

/// Central differences of `loss` against the analytic gradient already
/// accumulated in every registered parameter.
inline GradCheck check_gradients(const mtcd::nn::StateRegistry<double>& reg, const std::function<double()>& loss,
                                 double h = 1e-6) {
    GradCheck r;
    for (const auto& e : reg.parameters()) {
        auto& v = e.param->value.values();
        const auto& g = e.param->grad.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double keep = v[i];
            v[i] = keep + h;
            const double lp = loss();
            v[i] = keep - h;
            const double lm = loss();
            v[i] = keep;
            const double numeric = (lp - lm) / (2 * h);
            const double rel = rel_error(g[i], numeric);
            if (rel > r.max_rel) {
                r.max_rel = rel;
                r.worst = e.name + "[" + std::to_string(i) + "]";
            }
            ++r.checked;
        }
    }
    return r;
}

} // namespace oracle
