#pragma once

#include <vector>

#include "mtcd/nn/layer.hpp"

namespace mtcd::nn {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adaptive-moment optimiser over the parameters of a registry. The registry
/// must outlive the optimiser and keep its parameter order.
template <typename T>
class Adam {
public:
    Adam(const StateRegistry<T>& registry, AdamOptions options);

    /// Applies one update from the accumulated gradients.
    void step();
    long steps() const noexcept { return t_; }
    const AdamOptions& options() const noexcept { return opt_; }

private:
    const StateRegistry<T>* registry_;
    AdamOptions opt_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

} // namespace mtcd::nn
