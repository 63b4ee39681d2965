#include "mtcd/nn/blocks.hpp"

namespace mtcd::nn {

template <typename T>
Residual<T>::Residual(std::unique_ptr<Sequential<T>> body, std::unique_ptr<Sequential<T>> shortcut)
    : body_(std::move(body)), shortcut_(std::move(shortcut)) {}

template <typename T>
Tensor<T> Residual<T>::forward(const Tensor<T>& x) {
    Tensor<T> y = body_->forward(x);
    if (shortcut_)
        add_inplace(y, shortcut_->forward(x));
    else
        add_inplace(y, x);
    for (auto& v : y.values()) v = v > T(0) ? v : T(0);
    output_ = this->training_ ? y : Tensor<T>();
    return y;
}

template <typename T>
Tensor<T> Residual<T>::backward(const Tensor<T>& grad_out) {
    this->require_cache(!output_.empty(), "Residual");
    Tensor<T> g = grad_out;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!(output_[k] > T(0))) g[k] = T(0);
    Tensor<T> gx = body_->backward(g);
    if (shortcut_)
        add_inplace(gx, shortcut_->backward(g));
    else
        add_inplace(gx, g);
    return gx;
}

template <typename T>
void Residual<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    body_->register_state(prefix + ".body", reg);
    if (shortcut_) shortcut_->register_state(prefix + ".shortcut", reg);
}

template <typename T>
void Residual<T>::set_training(bool on) {
    this->training_ = on;
    body_->set_training(on);
    if (shortcut_) shortcut_->set_training(on);
}

template <typename T>
int Residual<T>::conv_count() const {
    return body_->conv_count() + (shortcut_ ? shortcut_->conv_count() : 0);
}

template <typename T>
Sequential<T>& Branches<T>::add_branch() {
    branches_.push_back(std::make_unique<Sequential<T>>());
    branches_.back()->set_training(this->training_);
    return *branches_.back();
}

template <typename T>
Tensor<T> Branches<T>::forward(const Tensor<T>& x) {
    if (branches_.empty()) throw ParameterError("Branches: no branch added");
    widths_.clear();
    Tensor<T> out = branches_.front()->forward(x);
    widths_.push_back(out.c());
    for (std::size_t b = 1; b < branches_.size(); ++b) {
        Tensor<T> y = branches_[b]->forward(x);
        widths_.push_back(y.c());
        out = concat_channels(out, y);
    }
    return out;
}

template <typename T>
Tensor<T> Branches<T>::backward(const Tensor<T>& grad_out) {
    Tensor<T> gx;
    int begin = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
        Tensor<T> g = branches_[b]->backward(slice_channels(grad_out, begin, widths_[b]));
        begin += widths_[b];
        if (gx.empty())
            gx = std::move(g);
        else
            add_inplace(gx, g);
    }
    return gx;
}

template <typename T>
void Branches<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    for (std::size_t b = 0; b < branches_.size(); ++b)
        branches_[b]->register_state(prefix + ".branch" + std::to_string(b), reg);
}

template <typename T>
void Branches<T>::set_training(bool on) {
    this->training_ = on;
    for (auto& b : branches_) b->set_training(on);
}

template <typename T>
int Branches<T>::conv_count() const {
    int n = 0;
    for (const auto& b : branches_) n += b->conv_count();
    return n;
}

template class Residual<float>;
template class Residual<double>;
template class Branches<float>;
template class Branches<double>;

} // namespace mtcd::nn
