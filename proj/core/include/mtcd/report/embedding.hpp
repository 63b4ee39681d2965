#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace mtcd::report {

using Point2 = std::array<double, 2>;

/// Exact (O(n^2) per iteration) t-SNE. Perplexity is capped at
/// (n - 1) / 3 for small inputs.
struct TsneOptions {
    double perplexity = 30;
    int iterations = 1000;
    double learning_rate = 200;
    double early_exaggeration = 12;
    int exaggeration_iterations = 250;
    std::uint64_t seed = 0;
};

std::vector<Point2> tsne(const std::vector<std::vector<float>>& x, const TsneOptions& options = {});

/// Mean silhouette coefficient under Euclidean distance. Points in a
/// singleton cluster score 0. Needs at least two distinct labels.
double silhouette(const std::vector<Point2>& points, const std::vector<int>& labels);

} // namespace mtcd::report
