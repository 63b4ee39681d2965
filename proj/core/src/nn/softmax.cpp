#include "mtcd/nn/softmax.hpp"

#include <cmath>

namespace mtcd::nn {

template <typename T>
Tensor<T> channel_softmax(const Tensor<T>& logits) {
    Tensor<T> out(logits.n(), logits.c(), logits.h(), logits.w());
    const std::size_t plane = logits.plane();
    const int k = logits.c();
    std::vector<double> e(static_cast<std::size_t>(k));
    for (int i = 0; i < logits.n(); ++i)
        for (std::size_t p = 0; p < plane; ++p) {
            double mx = logits.channel(i, 0)[p];
            for (int c = 1; c < k; ++c) mx = std::max(mx, static_cast<double>(logits.channel(i, c)[p]));
            double sum = 0;
            for (int c = 0; c < k; ++c) {
                e[static_cast<std::size_t>(c)] = std::exp(logits.channel(i, c)[p] - mx);
                sum += e[static_cast<std::size_t>(c)];
            }
            for (int c = 0; c < k; ++c)
                out.channel(i, c)[p] = static_cast<T>(e[static_cast<std::size_t>(c)] / sum);
        }
    return out;
}

template <typename T>
LossGrad<T> pixel_cross_entropy(const Tensor<T>& logits, const std::vector<std::uint8_t>& labels) {
    const std::size_t plane = logits.plane();
    const std::size_t count = plane * static_cast<std::size_t>(logits.n());
    if (labels.size() != count) throw ShapeError("pixel_cross_entropy: label count mismatch");
    const int k = logits.c();
    LossGrad<T> out;
    out.grad = Tensor<T>(logits.n(), k, logits.h(), logits.w());
    std::vector<double> e(static_cast<std::size_t>(k));
    double total = 0;
    const double inv = 1.0 / static_cast<double>(count);
    for (int i = 0; i < logits.n(); ++i)
        for (std::size_t p = 0; p < plane; ++p) {
            const int y = labels[static_cast<std::size_t>(i) * plane + p];
            if (y >= k) throw ValidationError("pixel_cross_entropy: label outside class range");
            double mx = logits.channel(i, 0)[p];
            for (int c = 1; c < k; ++c) mx = std::max(mx, static_cast<double>(logits.channel(i, c)[p]));
            double sum = 0;
            for (int c = 0; c < k; ++c) {
                e[static_cast<std::size_t>(c)] = std::exp(logits.channel(i, c)[p] - mx);
                sum += e[static_cast<std::size_t>(c)];
            }
            total += std::log(sum) - (logits.channel(i, y)[p] - mx);
            for (int c = 0; c < k; ++c) {
                const double prob = e[static_cast<std::size_t>(c)] / sum;
                out.grad.channel(i, c)[p] = static_cast<T>((prob - (c == y ? 1.0 : 0.0)) * inv);
            }
        }
    out.loss = total * inv;
    return out;
}

template Tensor<float> channel_softmax(const Tensor<float>&);
template Tensor<double> channel_softmax(const Tensor<double>&);
template LossGrad<float> pixel_cross_entropy(const Tensor<float>&, const std::vector<std::uint8_t>&);
template LossGrad<double> pixel_cross_entropy(const Tensor<double>&, const std::vector<std::uint8_t>&);

} // namespace mtcd::nn
