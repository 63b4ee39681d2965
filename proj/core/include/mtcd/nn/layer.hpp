#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mtcd/nn/tensor.hpp"

namespace mtcd::nn {

using Rng = std::mt19937_64;

/// Trainable tensor paired with its accumulated gradient.
template <typename T>
struct Parameter {
    Tensor<T> value;
    Tensor<T> grad;

    Parameter() = default;
    Parameter(int n, int c, int h, int w) : value(n, c, h, w), grad(n, c, h, w) {}
    void zero_grad() { grad.zero(); }
};

/// Named view of every trainable parameter and persistent buffer of a model,
/// in registration order. Registration order is the checkpoint order.
template <typename T>
class StateRegistry {
public:
    struct ParamEntry {
        std::string name;
        Parameter<T>* param;
    };
    struct BufferEntry {
        std::string name;
        Tensor<T>* tensor;
    };

    void add_parameter(std::string name, Parameter<T>& p) { params_.push_back({std::move(name), &p}); }
    void add_buffer(std::string name, Tensor<T>& t) { buffers_.push_back({std::move(name), &t}); }

    const std::vector<ParamEntry>& parameters() const noexcept { return params_; }
    const std::vector<BufferEntry>& buffers() const noexcept { return buffers_; }

    std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.param->value.size();
        return n;
    }
    void zero_grad() const {
        for (const auto& p : params_) p.param->zero_grad();
    }

private:
    std::vector<ParamEntry> params_;
    std::vector<BufferEntry> buffers_;
};

/// A differentiable stage. forward() caches what backward() needs while the
/// layer is in training mode; backward() must follow the matching forward()
/// and accumulates parameter gradients.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual Tensor<T> forward(const Tensor<T>& x) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

    /// Same as forward() but may keep `x` as its backward cache instead of
    /// copying it.
    virtual Tensor<T> forward_owned(Tensor<T>&& x) { return forward(x); }

    virtual void register_state(const std::string& /*prefix*/, StateRegistry<T>& /*reg*/) {}
    virtual void set_training(bool on) { training_ = on; }
    bool training() const noexcept { return training_; }

    /// Number of convolution layers (regular, not transposed) inside.
    virtual int conv_count() const { return 0; }

protected:
    void require_cache(bool present, const char* layer) const;

    bool training_ = true;
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

} // namespace mtcd::nn
