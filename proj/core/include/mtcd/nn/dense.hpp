#pragma once

#include <vector>

#include "mtcd/nn/layers.hpp"

namespace mtcd::nn {

/// BN-ReLU-Conv1x1 bottleneck followed by BN-ReLU-Conv3x3; emits
/// `growth` new channels computed from the concatenation of everything
/// before it in the block.
template <typename T>
class DenseLayer final : public Layer<T> {
public:
    DenseLayer(int in_channels, int growth, int bottleneck_width, Rng& rng);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;
    void set_training(bool on) override;
    int conv_count() const override { return 2; }

private:
    Sequential<T> body_;
};

/// Stack of dense layers; the output is the input concatenated with every
/// layer's new channels.
template <typename T>
class DenseBlock final : public Layer<T> {
public:
    DenseBlock(int in_channels, int layers, int growth, int bottleneck_width, Rng& rng);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;
    void set_training(bool on) override;
    int conv_count() const override;

    int in_channels() const noexcept { return in_; }
    int out_channels() const noexcept { return in_ + growth_ * static_cast<int>(layers_.size()); }

private:
    int in_, growth_;
    std::vector<std::unique_ptr<DenseLayer<T>>> layers_;
};

/// BN-ReLU-Conv1x1 channel compression followed by 2x2 average pooling.
template <typename T>
std::unique_ptr<Sequential<T>> make_transition(int in_channels, int out_channels, Rng& rng);

} // namespace mtcd::nn
