#include "mtcd/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace mtcd::data {

namespace {

constexpr double kLowerLid = 1.2;   // lower-lid height in iris radii, never over the iris
constexpr double kOpening = 2.2;    // opening half-width in iris radii

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Smooth lattice noise in [0, 1].
class ValueNoise {
public:
    ValueNoise(Rng& rng, int height, int width, double cell)
        : cell_(cell), gh_(static_cast<int>(height / cell) + 2), gw_(static_cast<int>(width / cell) + 2),
          v_(static_cast<std::size_t>(gh_ * gw_)) {
        for (auto& x : v_) x = uniform(rng, 0, 1);
    }

    double operator()(double y, double x) const {
        const double fy = y / cell_, fx = x / cell_;
        const int iy = std::clamp(static_cast<int>(fy), 0, gh_ - 2);
        const int ix = std::clamp(static_cast<int>(fx), 0, gw_ - 2);
        const double ty = smooth(fy - iy), tx = smooth(fx - ix);
        const double a = at(iy, ix), b = at(iy, ix + 1), c = at(iy + 1, ix), d = at(iy + 1, ix + 1);
        return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }

private:
    static double smooth(double t) { return t * t * (3 - 2 * t); }
    double at(int y, int x) const { return v_[static_cast<std::size_t>(y * gw_ + x)]; }

    double cell_;
    int gh_, gw_;
    std::vector<double> v_;
};

struct Arc {
    double radius, start, span;
};

double angle_diff(double a, double b) {
    double d = std::fmod(a - b, 2 * std::numbers::pi);
    if (d < 0) d += 2 * std::numbers::pi;
    return d;
}

} // namespace

std::string to_string(Condition c) {
    switch (c) {
    case Condition::healthy: return "healthy";
    case Condition::pre_cataract: return "pre_cataract";
    case Condition::post_cataract: return "post_cataract";
    }
    return "healthy";
}

Condition condition_from_string(const std::string& s) {
    if (s == "healthy") return Condition::healthy;
    if (s == "pre_cataract") return Condition::pre_cataract;
    if (s == "post_cataract") return Condition::post_cataract;
    throw ParameterError("unknown condition '" + s + "'");
}

double EyeGenParams::pupil_radius() const noexcept {
    return pupil_radius_fraction * iris_radius_px * (0.7 + 0.6 * dilation_level);
}

double EyeGenParams::upper_lid_height() const noexcept { return iris_radius_px * (1.2 - 1.2 * eyelid_droop); }

double EyeGenParams::opening_half_width() const noexcept { return kOpening * iris_radius_px; }

bool EyeGenParams::occluded(double px, double py) const noexcept {
    const double t = (px - center_x()) / opening_half_width();
    return py < center_y() - upper_lid_height() * (1 - t * t);
}

void EyeGenParams::validate() const {
    if (canvas_height < 16 || canvas_width < 16) throw ParameterError("canvas must be at least 16x16");
    if (iris_radius_px < 4) throw ParameterError("iris radius must be at least 4 pixels");
    if (!(pupil_radius_fraction > 0 && pupil_radius_fraction < 1))
        throw ParameterError("pupil_radius_fraction must lie in (0, 1)");
    if (!(eyelid_droop >= 0 && eyelid_droop <= 1)) throw ParameterError("eyelid_droop must lie in [0, 1]");
    if (!(dilation_level >= 0 && dilation_level <= 1)) throw ParameterError("dilation_level must lie in [0, 1]");
    if (specular_count < 0) throw ParameterError("specular_count must be non-negative");
    if (!(pupil_radius() < iris_radius_px - 1.0))
        throw ParameterError("pupil (radius " + std::to_string(pupil_radius()) +
                             ") is not strictly inside the iris (radius " + std::to_string(iris_radius_px) + ")");
    if (center_x() < 0 || center_x() > canvas_width || center_y() < 0 || center_y() > canvas_height)
        throw ParameterError("iris centre lies outside the canvas");
}

EyeSample generate_eye(const EyeGenParams& p) {
    p.validate();
    Rng rng(p.rng_seed);
    const int h = p.canvas_height, w = p.canvas_width;
    const double cx = p.center_x(), cy = p.center_y();
    const double r = p.iris_radius_px, rp = p.pupil_radius();
    const double a = p.opening_half_width();
    const double lid_up = p.upper_lid_height(), lid_low = kLowerLid * r;

    // Every random draw happens here, in a fixed order.
    const ValueNoise skin_noise(rng, h, w, 24);
    const ValueNoise fine_noise(rng, h, w, 3);
    const ValueNoise cloud(rng, h, w, std::max(4.0, rp / 2));
    const double skin_level = uniform(rng, 105, 130);
    const double light_slope = uniform(rng, -20, 20);
    const double sclera_level = uniform(rng, 175, 200);
    const double iris_level = uniform(rng, 72, 98);
    const int streaks = static_cast<int>(uniform(rng, 14, 26));
    const double streak_phase = uniform(rng, 0, 2 * std::numbers::pi);
    const double pupil_level = uniform(rng, 14, 30);
    const double severity = uniform(rng, 0.6, 1.0);
    const double ring_radius = rp * uniform(rng, 0.72, 0.88);

    std::vector<Arc> arcs;
    if (p.condition == Condition::post_cataract) {
        const int n = static_cast<int>(uniform(rng, 1, 4));
        for (int k = 0; k < n; ++k)
            arcs.push_back({rp + (r - rp) * uniform(rng, 0.3, 0.7), uniform(rng, 0, 2 * std::numbers::pi),
                            uniform(rng, 0.35, 0.8)});
    }
    struct Spot {
        double x, y, radius;
    };
    std::vector<Spot> spots;
    for (int k = 0; k < p.specular_count; ++k) {
        const double ang = uniform(rng, 0, 2 * std::numbers::pi);
        const double dist = uniform(rng, 0, 0.7) * r;
        spots.push_back({cx + dist * std::cos(ang), cy + dist * std::sin(ang), uniform(rng, 2.0, 4.5)});
    }
    std::normal_distribution<double> sensor(0.0, 3.0);

    EyeSample s;
    s.image = GrayImage(h, w);
    s.mask = BinaryMask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double dx = px - cx, dy = py - cy;
            const double t = dx / a;
            const double upper = cy - lid_up * (1 - t * t);
            const double lower = cy + lid_low * (1 - t * t);
            const bool in_opening = std::abs(t) < 1 && py >= upper && py <= lower;
            const double d2 = dx * dx + dy * dy;
            double v;
            if (!in_opening) {
                v = skin_level + light_slope * (px / w - 0.5) + 25 * (skin_noise(py, px) - 0.5);
                // Lash line along the upper lid margin.
                const double gap = upper - py;
                if (std::abs(t) < 1 && gap >= 0 && gap < 4) v *= 0.45 + 0.12 * gap;
            } else if (d2 <= r * r) {
                (*s.mask)(y, x) = 1;
                const double rho = std::sqrt(d2);
                if (rho <= rp) {
                    if (p.condition == Condition::pre_cataract)
                        v = 40 + severity * 180 * (0.75 + 0.25 * cloud(py, px));
                    else
                        v = pupil_level + 6 * (fine_noise(py, px) - 0.5);
                    if (p.condition == Condition::post_cataract && std::abs(rho - ring_radius) < 1.2)
                        v += 75;
                } else {
                    const double u = (rho - rp) / (r - rp);
                    const double theta = std::atan2(dy, dx);
                    v = iris_level + 10 * std::sin(streaks * theta + streak_phase + 3 * u) +
                        16 * (fine_noise(py, px) - 0.5);
                    if (u > 0.82) v -= 22 * (u - 0.82) / 0.18;
                    if (u < 0.2) v += 8;
                    for (const auto& arc : arcs)
                        if (std::abs(rho - arc.radius) < 1.3 && angle_diff(theta, arc.start) < arc.span) v = 215;
                }
                for (const auto& sp : spots) {
                    const double e2 = (px - sp.x) * (px - sp.x) + (py - sp.y) * (py - sp.y);
                    if (e2 <= sp.radius * sp.radius) v = std::max(v, 245.0 - 20 * e2 / (sp.radius * sp.radius));
                }
            } else {
                v = sclera_level * (1 - 0.25 * t * t) + 8 * (fine_noise(py, px) - 0.5) + light_slope * 0.3 * (px / w - 0.5);
            }
            v += sensor(rng);
            s.image(y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }

    switch (p.condition) {
    case Condition::healthy:
        s.label_t1 = T1Label::healthy;
        s.label_t2 = T2Label::others;
        break;
    case Condition::pre_cataract:
        s.label_t1 = T1Label::unhealthy;
        s.label_t2 = T2Label::pre_cataract;
        break;
    case Condition::post_cataract:
        s.label_t1 = T1Label::unhealthy;
        s.label_t2 = T2Label::post_cataract;
        break;
    }
    s.sample_id = to_string(p.condition) + "_" + std::to_string(p.rng_seed);
    return s;
}

} // namespace mtcd::data
