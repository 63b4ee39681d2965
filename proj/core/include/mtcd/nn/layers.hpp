#pragma once

#include <vector>

#include "mtcd/nn/layer.hpp"

namespace mtcd::nn {

/// Stride-1 "same" convolution with an odd square kernel. Each kernel tap is
/// one GEMM over a shifted window of the zero-padded input, so no im2col
/// buffer is materialised.
template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(int in_channels, int out_channels, int kernel, bool bias);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> forward_owned(Tensor<T>&& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;
    int conv_count() const override { return 1; }

    /// Normal weights with std = sqrt(gain / fan_in); zero bias. gain 2 is He
    /// initialisation for layers followed by ReLU.
    void init_normal(Rng& rng, double gain = 2.0);

    int in_channels() const noexcept { return cin_; }
    int out_channels() const noexcept { return cout_; }
    int kernel() const noexcept { return k_; }
    bool has_bias() const noexcept { return has_bias_; }

    /// Layout (out, in, k, k).
    Parameter<T>& weight() noexcept { return weight_; }
    /// Layout (1, out, 1, 1); unused when constructed without bias.
    Parameter<T>& bias() noexcept { return bias_; }

private:
    Tensor<T> run(const Tensor<T>& x);

    int cin_, cout_, k_;
    bool has_bias_;
    Parameter<T> weight_;
    Parameter<T> bias_;
    Tensor<T> cached_;  // padded input (k > 1) or raw input (k == 1)
    int in_h_ = 0, in_w_ = 0;
};

/// Transposed convolution with kernel 2 and stride 2: doubles H and W.
template <typename T>
class Deconv2x2 final : public Layer<T> {
public:
    Deconv2x2(int in_channels, int out_channels, bool bias);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;

    void init_normal(Rng& rng, double gain = 1.0);
    /// Sets the kernel so that each input pixel is replicated into its 2x2
    /// output cell (nearest-neighbour upsampling) and zeroes the bias.
    void set_nearest_neighbor();

    /// Layout (in, out, 2, 2).
    Parameter<T>& weight() noexcept { return weight_; }
    Parameter<T>& bias() noexcept { return bias_; }

private:
    int cin_, cout_;
    bool has_bias_;
    Parameter<T> weight_;
    Parameter<T> bias_;
    Tensor<T> cached_;
};

/// Per-channel batch normalisation with running statistics for inference,
/// optionally followed by a fused ReLU.
template <typename T>
class BatchNorm2d final : public Layer<T> {
public:
    explicit BatchNorm2d(int channels, bool relu = false, double momentum = 0.1, double eps = 1e-5);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;

private:
    int channels_;
    bool relu_;
    double momentum_, eps_;
    Parameter<T> gamma_, beta_;
    Tensor<T> running_mean_, running_var_;
    Tensor<T> xhat_;
    std::vector<double> inv_std_;
};

template <typename T>
class ReLU final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    Tensor<T> output_;
};

/// 2x2 average pooling with stride 2; H and W must be even.
template <typename T>
class AvgPool2x2 final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    std::array<int, 4> in_shape_{};
    bool cached_ = false;
};

/// Averages each channel over H and W, producing (N, C, 1, 1).
template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;

private:
    std::array<int, 4> in_shape_{};
    bool cached_ = false;
};

/// Fully connected layer on (N, in, 1, 1) inputs.
template <typename T>
class Linear final : public Layer<T> {
public:
    Linear(int in_features, int out_features);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;

    /// Uniform(-1/sqrt(in), 1/sqrt(in)) weights, zero bias.
    void init_default(Rng& rng);
    void zero();

    Parameter<T>& weight() noexcept { return weight_; }  // (out, in, 1, 1)
    Parameter<T>& bias() noexcept { return bias_; }      // (1, out, 1, 1)

private:
    int in_, out_;
    Parameter<T> weight_, bias_;
    Tensor<T> cached_;
};

/// Runs child layers in order.
template <typename T>
class Sequential final : public Layer<T> {
public:
    Sequential() = default;

    Layer<T>& add(LayerPtr<T> layer);
    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        auto owned = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *owned;
        add(std::move(owned));
        return ref;
    }

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;
    void set_training(bool on) override;
    int conv_count() const override;

    std::size_t size() const noexcept { return layers_.size(); }
    Layer<T>& at(std::size_t i) { return *layers_.at(i); }

private:
    std::vector<LayerPtr<T>> layers_;
};

} // namespace mtcd::nn
