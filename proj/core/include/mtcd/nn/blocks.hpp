#pragma once

#include <vector>

#include "mtcd/nn/layers.hpp"

namespace mtcd::nn {

/// relu(body(x) + shortcut(x)); an empty shortcut is the identity.
template <typename T>
class Residual final : public Layer<T> {
public:
    Residual(std::unique_ptr<Sequential<T>> body, std::unique_ptr<Sequential<T>> shortcut);

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;
    void set_training(bool on) override;
    int conv_count() const override;

private:
    std::unique_ptr<Sequential<T>> body_;
    std::unique_ptr<Sequential<T>> shortcut_;
    Tensor<T> output_;
};

/// Runs every branch on the same input and concatenates their outputs along
/// channels (Inception-style module).
template <typename T>
class Branches final : public Layer<T> {
public:
    Sequential<T>& add_branch();

    Tensor<T> forward(const Tensor<T>& x) override;
    Tensor<T> backward(const Tensor<T>& grad_out) override;
    void register_state(const std::string& prefix, StateRegistry<T>& reg) override;
    void set_training(bool on) override;
    int conv_count() const override;

private:
    std::vector<std::unique_ptr<Sequential<T>>> branches_;
    std::vector<int> widths_;
};

} // namespace mtcd::nn
