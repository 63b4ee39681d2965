#pragma once

#include <cstdint>
#include <vector>

#include "mtcd/nn/tensor.hpp"

namespace mtcd::nn {

/// Softmax across channels at every (sample, pixel).
template <typename T>
Tensor<T> channel_softmax(const Tensor<T>& logits);

template <typename T>
struct LossGrad {
    double loss = 0;
    Tensor<T> grad;  // d loss / d logits
};

/// Mean over all pixels of -log softmax(logits)[label]. `labels` holds one
/// class index per (sample, pixel) in NHW order.
template <typename T>
LossGrad<T> pixel_cross_entropy(const Tensor<T>& logits, const std::vector<std::uint8_t>& labels);

} // namespace mtcd::nn
