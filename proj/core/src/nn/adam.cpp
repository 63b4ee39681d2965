#include "mtcd/nn/adam.hpp"

#include <cmath>

namespace mtcd::nn {

template <typename T>
Adam<T>::Adam(const StateRegistry<T>& registry, AdamOptions options)
    : registry_(&registry), opt_(options) {
    if (!(options.lr > 0)) throw ParameterError("Adam: learning rate must be positive");
    for (const auto& p : registry.parameters()) {
        m_.emplace_back(p.param->value.size(), 0.0);
        v_.emplace_back(p.param->value.size(), 0.0);
    }
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    const auto& params = registry_->parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& value = params[i].param->value;
        const auto& grad = params[i].param->grad;
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double g = grad[k];
            m[k] = opt_.beta1 * m[k] + (1 - opt_.beta1) * g;
            v[k] = opt_.beta2 * v[k] + (1 - opt_.beta2) * g * g;
            const double update = opt_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + opt_.eps);
            value[k] = static_cast<T>(value[k] - update);
        }
    }
}

template class Adam<float>;
template class Adam<double>;

} // namespace mtcd::nn
