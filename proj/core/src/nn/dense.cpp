#include "mtcd/nn/dense.hpp"

namespace mtcd::nn {

template <typename T>
DenseLayer<T>::DenseLayer(int in_channels, int growth, int bottleneck_width, Rng& rng) {
    body_.template emplace<BatchNorm2d<T>>(in_channels, true);
    body_.template emplace<Conv2d<T>>(in_channels, bottleneck_width, 1, false).init_normal(rng);
    body_.template emplace<BatchNorm2d<T>>(bottleneck_width, true);
    body_.template emplace<Conv2d<T>>(bottleneck_width, growth, 3, false).init_normal(rng);
}

template <typename T>
Tensor<T> DenseLayer<T>::forward(const Tensor<T>& x) {
    return body_.forward(x);
}

template <typename T>
Tensor<T> DenseLayer<T>::backward(const Tensor<T>& g) {
    return body_.backward(g);
}

template <typename T>
void DenseLayer<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    body_.register_state(prefix, reg);
}

template <typename T>
void DenseLayer<T>::set_training(bool on) {
    this->training_ = on;
    body_.set_training(on);
}

template <typename T>
DenseBlock<T>::DenseBlock(int in_channels, int layers, int growth, int bottleneck_width, Rng& rng)
    : in_(in_channels), growth_(growth) {
    if (layers <= 0) throw ParameterError("DenseBlock: needs at least one layer");
    for (int l = 0; l < layers; ++l)
        layers_.push_back(std::make_unique<DenseLayer<T>>(in_channels + l * growth, growth,
                                                          bottleneck_width, rng));
}

template <typename T>
Tensor<T> DenseBlock<T>::forward(const Tensor<T>& x) {
    if (x.c() != in_) throw ShapeError("DenseBlock: channel mismatch");
    Tensor<T> features = x;
    for (auto& layer : layers_) features = concat_channels(features, layer->forward(features));
    return features;
}

template <typename T>
Tensor<T> DenseBlock<T>::backward(const Tensor<T>& grad_out) {
    if (grad_out.c() != out_channels()) throw ShapeError("DenseBlock::backward: gradient shape");
    Tensor<T> g = grad_out;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const int before = in_ + static_cast<int>(l) * growth_;
        Tensor<T> g_prev, g_new;
        split_channels(g, before, g_prev, g_new);
        add_inplace(g_prev, layers_[l]->backward(g_new));
        g = std::move(g_prev);
    }
    return g;
}

template <typename T>
void DenseBlock<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    for (std::size_t l = 0; l < layers_.size(); ++l)
        layers_[l]->register_state(prefix + ".layer" + std::to_string(l), reg);
}

template <typename T>
void DenseBlock<T>::set_training(bool on) {
    this->training_ = on;
    for (auto& l : layers_) l->set_training(on);
}

template <typename T>
int DenseBlock<T>::conv_count() const {
    int n = 0;
    for (const auto& l : layers_) n += l->conv_count();
    return n;
}

template <typename T>
std::unique_ptr<Sequential<T>> make_transition(int in_channels, int out_channels, Rng& rng) {
    auto t = std::make_unique<Sequential<T>>();
    t->template emplace<BatchNorm2d<T>>(in_channels, true);
    t->template emplace<Conv2d<T>>(in_channels, out_channels, 1, false).init_normal(rng);
    t->template emplace<AvgPool2x2<T>>();
    return t;
}

template class DenseLayer<float>;
template class DenseLayer<double>;
template class DenseBlock<float>;
template class DenseBlock<double>;
template std::unique_ptr<Sequential<float>> make_transition<float>(int, int, Rng&);
template std::unique_ptr<Sequential<double>> make_transition<double>(int, int, Rng&);

} // namespace mtcd::nn
