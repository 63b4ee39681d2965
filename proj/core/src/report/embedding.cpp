#include "mtcd/report/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "mtcd/error.hpp"

namespace mtcd::report {

namespace {

/// Row of conditional probabilities p_{j|i} with entropy matching
/// log(perplexity), found by bisection on the Gaussian precision.
void conditional_row(const std::vector<double>& d2, std::size_t i, double perplexity, double* row) {
    const std::size_t n = d2.size();
    const double target = std::log(perplexity);
    double beta = 1, lo = 0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        double sum = 0, dot = 0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = j == i ? 0 : std::exp(-beta * d2[j]);
            sum += row[j];
            dot += row[j] * d2[j];
        }
        if (sum <= 0) sum = std::numeric_limits<double>::min();
        const double entropy = std::log(sum) + beta * dot / sum;
        for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
        const double diff = entropy - target;
        if (std::abs(diff) < 1e-5) break;
        if (diff > 0) {
            lo = beta;
            beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
        } else {
            hi = beta;
            beta = (beta + lo) / 2;
        }
    }
}

} // namespace

std::vector<Point2> tsne(const std::vector<std::vector<float>>& x, const TsneOptions& opt) {
    const std::size_t n = x.size();
    if (n < 4) throw ValidationError("t-SNE needs at least 4 points");
    const std::size_t dim = x.front().size();
    for (const auto& v : x)
        if (v.size() != dim) throw ShapeError("t-SNE inputs differ in dimension");

    // Standardise features so no single channel dominates the distances.
    std::vector<double> mean(dim, 0), scale(dim, 0);
    for (const auto& v : x)
        for (std::size_t k = 0; k < dim; ++k) mean[k] += v[k] / static_cast<double>(n);
    for (const auto& v : x)
        for (std::size_t k = 0; k < dim; ++k) scale[k] += (v[k] - mean[k]) * (v[k] - mean[k]) / static_cast<double>(n);
    for (auto& s : scale) s = s > 1e-24 ? 1 / std::sqrt(s) : 0;

    std::vector<double> P(n * n);
    {
        std::vector<double> d2(n);
        const double perplexity = std::min(opt.perplexity, (static_cast<double>(n) - 1) / 3);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0;
                for (std::size_t k = 0; k < dim; ++k) {
                    const double d = (x[i][k] - x[j][k]) * scale[k];
                    s += d * d;
                }
                d2[j] = s;
            }
            conditional_row(d2, i, perplexity, &P[i * n]);
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = std::max((P[i * n + j] + P[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
                P[i * n + j] = P[j * n + i] = v;
            }
    }

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> init(0, 1e-4);
    std::vector<Point2> y(n), update(n, {0, 0}), gains(n, {1, 1});
    for (auto& p : y) p = {init(rng), init(rng)};

    std::vector<double> num(n * n);
    for (int it = 0; it < opt.iterations; ++it) {
        const double exaggeration = it < opt.exaggeration_iterations ? opt.early_exaggeration : 1.0;
        const double momentum = it < opt.exaggeration_iterations ? 0.5 : 0.8;
        double z = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
                const double q = 1 / (1 + dx * dx + dy * dy);
                num[i * n + j] = num[j * n + i] = q;
                z += 2 * q;
            }
        for (std::size_t i = 0; i < n; ++i) {
            double g0 = 0, g1 = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double q = num[i * n + j];
                const double m = (exaggeration * P[i * n + j] - q / z) * q;
                g0 += 4 * m * (y[i][0] - y[j][0]);
                g1 += 4 * m * (y[i][1] - y[j][1]);
            }
            const double g[2] = {g0, g1};
            for (int d = 0; d < 2; ++d) {
                auto& gain = gains[i][static_cast<std::size_t>(d)];
                auto& u = update[i][static_cast<std::size_t>(d)];
                gain = (g[d] > 0) != (u > 0) ? gain + 0.2 : gain * 0.8;
                gain = std::max(gain, 0.01);
                u = momentum * u - opt.learning_rate * gain * g[d];
            }
        }
        Point2 centre{0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            y[i][0] += update[i][0];
            y[i][1] += update[i][1];
            centre[0] += y[i][0] / static_cast<double>(n);
            centre[1] += y[i][1] / static_cast<double>(n);
        }
        for (auto& p : y) {
            p[0] -= centre[0];
            p[1] -= centre[1];
        }
    }
    return y;
}

double silhouette(const std::vector<Point2>& points, const std::vector<int>& labels) {
    const std::size_t n = points.size();
    if (n != labels.size()) throw ShapeError("silhouette: point and label counts differ");
    std::map<int, std::size_t> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) throw ValidationError("silhouette needs at least two clusters");

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;
        std::map<int, double> sum;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum[labels[j]] += std::hypot(points[i][0] - points[j][0], points[i][1] - points[j][1]);
        }
        const double a = sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, s] : sum)
            if (label != labels[i]) b = std::min(b, s / static_cast<double>(sizes[label]));
        const double m = std::max(a, b);
        total += m > 0 ? (b - a) / m : 0;
    }
    return total / static_cast<double>(n);
}

} // namespace mtcd::report
