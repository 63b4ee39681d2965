#include "mtcd/seg/pyramid_net.hpp"

#include <algorithm>
#include <cmath>

namespace mtcd::seg {

// ---------------------------------------------------------------- Fusion

template <typename T>
Fusion<T>::Fusion(nn::Rng& rng) : deconv_(2, 2, true), smooth_(4, 4, 3, true), reduce_(4, 2, 1, true) {
    deconv_.set_nearest_neighbor();
    smooth_.init_normal(rng, 1.0);
    reduce_.init_normal(rng, 1.0);
}

template <typename T>
Tensor<T> Fusion<T>::forward(const Tensor<T>& fine, const Tensor<T>& coarse) {
    if (fine.c() != 2 || coarse.c() != 2) throw ShapeError("fuse: both inputs must have 2 channels");
    if (fine.n() != coarse.n() || fine.h() != 2 * coarse.h() || fine.w() != 2 * coarse.w())
        throw ShapeError("fuse: coarse map " + nn::shape_string(coarse.shape()) +
                         " is not half the size of " + nn::shape_string(fine.shape()));
    concat_ = nn::concat_channels(fine, deconv_.forward(coarse));
    return reduce_.forward(smooth_.forward(concat_));
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> Fusion<T>::backward(const Tensor<T>& grad_out) {
    Tensor<T> g = smooth_.backward(reduce_.backward(grad_out));
    Tensor<T> g_fine, g_up;
    nn::split_channels(g, 2, g_fine, g_up);
    return {std::move(g_fine), deconv_.backward(g_up)};
}

template <typename T>
void Fusion<T>::register_state(const std::string& prefix, nn::StateRegistry<T>& reg) {
    deconv_.register_state(prefix + ".deconv", reg);
    smooth_.register_state(prefix + ".smooth", reg);
    reduce_.register_state(prefix + ".reduce", reg);
}

template <typename T>
void Fusion<T>::set_training(bool on) {
    deconv_.set_training(on);
    smooth_.set_training(on);
    reduce_.set_training(on);
}

// -------------------------------------------------------------- Backbone

template <typename T>
Backbone<T>::Backbone(const PyramidConfig& config, nn::Rng& rng)
    : stem_(1, config.init_channels, 3, false) {
    stem_.init_normal(rng);
    const int width = config.bottleneck_factor * config.growth_rate;
    int channels = config.init_channels;
    for (int b = 0; b < config.n_blocks; ++b) {
        blocks_.push_back(std::make_unique<nn::DenseBlock<T>>(
            channels, config.layers_per_block[static_cast<std::size_t>(b)], config.growth_rate, width, rng));
        channels = blocks_.back()->out_channels();
        if (b + 1 < config.n_blocks) {
            const int out = std::max(1, static_cast<int>(std::floor(config.compression * channels)));
            transitions_.push_back(nn::make_transition<T>(channels, out, rng));
            channels = out;
        }
    }
}

template <typename T>
std::vector<Tensor<T>> Backbone<T>::forward(const Tensor<T>& image) {
    std::vector<Tensor<T>> outputs;
    Tensor<T> h = stem_.forward(image);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        outputs.push_back(blocks_[b]->forward(h));
        if (b < transitions_.size()) h = transitions_[b]->forward(outputs.back());
    }
    return outputs;
}

template <typename T>
Tensor<T> Backbone<T>::backward(const std::vector<Tensor<T>>& grads) {
    if (grads.size() != blocks_.size()) throw ShapeError("Backbone::backward: one gradient per block expected");
    Tensor<T> into_block;  // gradient w.r.t. the input of block b+1
    for (std::size_t b = blocks_.size(); b-- > 0;) {
        Tensor<T> g = grads[b];
        if (!into_block.empty()) {
            Tensor<T> from_next = transitions_[b]->backward(into_block);
            if (g.empty())
                g = std::move(from_next);
            else
                nn::add_inplace(g, from_next);
        }
        if (g.empty()) continue;
        into_block = blocks_[b]->backward(g);
    }
    if (into_block.empty()) return into_block;
    return stem_.backward(into_block);
}

template <typename T>
void Backbone<T>::register_state(const std::string& prefix, nn::StateRegistry<T>& reg) {
    stem_.register_state(prefix + ".stem", reg);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        blocks_[b]->register_state(prefix + ".block" + std::to_string(b + 1), reg);
        if (b < transitions_.size())
            transitions_[b]->register_state(prefix + ".transition" + std::to_string(b + 1), reg);
    }
}

template <typename T>
void Backbone<T>::set_training(bool on) {
    stem_.set_training(on);
    for (auto& b : blocks_) b->set_training(on);
    for (auto& t : transitions_) t->set_training(on);
}

template <typename T>
int Backbone<T>::conv_count() const {
    int n = stem_.conv_count();
    for (const auto& b : blocks_) n += b->conv_count();
    for (const auto& t : transitions_) n += t->conv_count();
    return n;
}

template <typename T>
std::vector<int> Backbone<T>::block_channels() const {
    std::vector<int> c;
    for (const auto& b : blocks_) c.push_back(b->out_channels());
    return c;
}

// ------------------------------------------------------------ PyramidNet

namespace {
PyramidConfig validated(PyramidConfig c) {
    c.validate();
    return c;
}
} // namespace

template <typename T>
PyramidNet<T>::PyramidNet(PyramidConfig config, std::uint64_t seed)
    : config_(validated(std::move(config))), rng_(seed), backbone_(config_, rng_) {
    const auto channels = backbone_.block_channels();
    for (int c : channels) {
        reducers_.push_back(std::make_unique<nn::Conv2d<T>>(c, 2, 1, true));
        reducers_.back()->init_normal(rng_, 1.0);
    }
    const int n = config_.n_blocks;
    for (int j = 2; j <= config_.structural_levels; ++j) {
        std::vector<std::unique_ptr<Fusion<T>>> row;
        for (int i = 1; i <= n - (j - 1); ++i) row.push_back(std::make_unique<Fusion<T>>(rng_));
        fusions_.push_back(std::move(row));
    }
    for (int k = 0; k < n - config_.structural_levels; ++k) {
        upsamplers_.push_back(std::make_unique<nn::Deconv2x2<T>>(2, 2, true));
        upsamplers_.back()->set_nearest_neighbor();
    }

    backbone_.register_state("backbone", registry_);
    for (std::size_t i = 0; i < reducers_.size(); ++i)
        reducers_[i]->register_state("pyramid.reduce" + std::to_string(i + 1), registry_);
    for (std::size_t j = 0; j < fusions_.size(); ++j)
        for (std::size_t i = 0; i < fusions_[j].size(); ++i)
            fusions_[j][i]->register_state(
                "pyramid.fuse" + std::to_string(j + 2) + "_" + std::to_string(i + 1), registry_);
    for (std::size_t k = 0; k < upsamplers_.size(); ++k)
        upsamplers_[k]->register_state("pyramid.up" + std::to_string(k + 1), registry_);
}

template <typename T>
void PyramidNet<T>::check_input(const Tensor<T>& image) const {
    if (image.n() < 1 || image.c() != 1 || image.h() != config_.input_height ||
        image.w() != config_.input_width)
        throw ShapeError("PyramidNet expects (N, 1, " + std::to_string(config_.input_height) + ", " +
                         std::to_string(config_.input_width) + ") input, got " +
                         nn::shape_string(image.shape()));
}

template <typename T>
std::vector<Tensor<T>> PyramidNet<T>::backbone_forward(const Tensor<T>& image) {
    check_input(image);
    return backbone_.forward(image);
}

template <typename T>
Tensor<T> PyramidNet<T>::reduce_channels(int i, const Tensor<T>& block_output) {
    return reducer(i).forward(block_output);
}

template <typename T>
PyramidOutput<T> PyramidNet<T>::forward_pyramid(const Tensor<T>& image) {
    PyramidOutput<T> out;
    out.block_outputs = backbone_forward(image);
    const int n = config_.n_blocks;

    FeatureMapSet<T> first;
    first.level = 1;
    for (int i = 1; i <= n; ++i)
        first.maps.push_back(reduce_channels(i, out.block_outputs[static_cast<std::size_t>(i - 1)]));
    out.levels.push_back(std::move(first));

    for (int j = 2; j <= config_.structural_levels; ++j) {
        const auto& prev = out.levels.back().maps;
        FeatureMapSet<T> next;
        next.level = j;
        for (int i = 1; i <= n - (j - 1); ++i)
            next.maps.push_back(fusion(j, i).forward(prev[static_cast<std::size_t>(i - 1)],
                                                     prev[static_cast<std::size_t>(i)]));
        out.levels.push_back(std::move(next));
    }

    // The coarsest map of the last level; with a full pyramid it is the only
    // one and already has input resolution.
    Tensor<T> top = out.levels.back().maps.back();
    for (auto& up : upsamplers_) top = up->forward(top);
    out.logits = std::move(top);
    has_forward_ = training_;
    return out;
}

template <typename T>
void PyramidNet<T>::backward(const Tensor<T>& grad_logits) {
    if (!has_forward_) throw Error("PyramidNet::backward without a training-mode forward");
    has_forward_ = false;
    const int n = config_.n_blocks;
    const int s = config_.structural_levels;

    Tensor<T> g = grad_logits;
    for (std::size_t k = upsamplers_.size(); k-- > 0;) g = upsamplers_[k]->backward(g);

    // grads[i-1] holds d loss / d f_j^i for the level currently being unwound.
    std::vector<Tensor<T>> grads(static_cast<std::size_t>(n - (s - 1)));
    grads.back() = std::move(g);
    for (int j = s; j >= 2; --j) {
        std::vector<Tensor<T>> lower(static_cast<std::size_t>(n - (j - 2)));
        for (int i = 1; i <= n - (j - 1); ++i) {
            auto& gi = grads[static_cast<std::size_t>(i - 1)];
            if (gi.empty()) continue;
            auto [g_fine, g_coarse] = fusion(j, i).backward(gi);
            for (auto [idx, part] : {std::pair{i - 1, &g_fine}, std::pair{i, &g_coarse}}) {
                auto& dst = lower[static_cast<std::size_t>(idx)];
                if (dst.empty())
                    dst = std::move(*part);
                else
                    nn::add_inplace(dst, *part);
            }
        }
        grads = std::move(lower);
    }

    std::vector<Tensor<T>> block_grads(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        auto& gi = grads[static_cast<std::size_t>(i - 1)];
        if (!gi.empty()) block_grads[static_cast<std::size_t>(i - 1)] = reducer(i).backward(gi);
    }
    backbone_.backward(block_grads);
}

template <typename T>
std::vector<MaskPrediction> PyramidNet<T>::predict_mask(const Tensor<T>& image) {
    return masks_from_logits(forward_pyramid(image).logits);
}

template <typename T>
void PyramidNet<T>::set_training(bool on) {
    training_ = on;
    has_forward_ = false;
    backbone_.set_training(on);
    for (auto& r : reducers_) r->set_training(on);
    for (auto& row : fusions_)
        for (auto& f : row) f->set_training(on);
    for (auto& u : upsamplers_) u->set_training(on);
}

// -------------------------------------------------------------- helpers

template <typename T>
Tensor<T> images_to_tensor(const std::vector<RealImage>& images) {
    if (images.empty()) throw ShapeError("images_to_tensor: empty batch");
    const int h = images.front().height(), w = images.front().width();
    Tensor<T> t(static_cast<int>(images.size()), 1, h, w);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!images[i].same_shape(h, w)) throw ShapeError("images_to_tensor: mixed image sizes");
        std::transform(images[i].pixels().begin(), images[i].pixels().end(),
                       t.sample(static_cast<int>(i)), [](float v) { return static_cast<T>(v); });
    }
    return t;
}

namespace {
template <typename T>
std::vector<MaskPrediction> masks_impl(const Tensor<T>& logits) {
    if (logits.c() != 2) throw ShapeError("masks_from_logits: expected 2 channels");
    const auto prob = nn::channel_softmax(logits);
    std::vector<MaskPrediction> out;
    for (int i = 0; i < logits.n(); ++i) {
        MaskPrediction p{RealImage(logits.h(), logits.w()), RealImage(logits.h(), logits.w()),
                         BinaryMask(logits.h(), logits.w())};
        const T* fg = prob.channel(i, 0);
        const T* bg = prob.channel(i, 1);
        for (std::size_t k = 0; k < prob.plane(); ++k) {
            p.foreground.data()[k] = static_cast<float>(fg[k]);
            p.background.data()[k] = static_cast<float>(bg[k]);
            p.mask.data()[k] = fg[k] >= bg[k] ? 1 : 0;
        }
        out.push_back(std::move(p));
    }
    return out;
}
} // namespace

std::vector<MaskPrediction> masks_from_logits(const Tensor<double>& logits) { return masks_impl(logits); }
std::vector<MaskPrediction> masks_from_logits(const Tensor<float>& logits) { return masks_impl(logits); }

double seg_loss(const MaskPrediction& pred, const BinaryMask& gt) {
    if (!pred.foreground.same_shape(gt) || !pred.background.same_shape(gt))
        throw ShapeError("seg_loss: prediction and ground truth differ in shape");
    require_binary(gt, "seg_loss");
    constexpr double floor = 1e-12;
    double total = 0;
    for (std::size_t k = 0; k < gt.size(); ++k) {
        const double p = gt.data()[k] ? pred.foreground.data()[k] : pred.background.data()[k];
        total -= std::log(std::max(p, floor));
    }
    return total / static_cast<double>(gt.size());
}

template <typename T>
nn::LossGrad<T> seg_loss_from_logits(const Tensor<T>& logits, const std::vector<BinaryMask>& gt) {
    if (static_cast<int>(gt.size()) != logits.n() || logits.c() != 2)
        throw ShapeError("seg_loss_from_logits: batch/channel mismatch");
    std::vector<std::uint8_t> labels;
    labels.reserve(static_cast<std::size_t>(logits.n()) * logits.plane());
    for (const auto& m : gt) {
        if (!m.same_shape(logits.h(), logits.w()))
            throw ShapeError("seg_loss_from_logits: mask size differs from logits");
        require_binary(m, "seg_loss");
        for (auto v : m.pixels()) labels.push_back(v ? 0 : 1);
    }
    return nn::pixel_cross_entropy(logits, labels);
}

template class Fusion<float>;
template class Fusion<double>;
template class Backbone<float>;
template class Backbone<double>;
template class PyramidNet<float>;
template class PyramidNet<double>;
template Tensor<float> images_to_tensor<float>(const std::vector<RealImage>&);
template Tensor<double> images_to_tensor<double>(const std::vector<RealImage>&);
template nn::LossGrad<float> seg_loss_from_logits(const Tensor<float>&, const std::vector<BinaryMask>&);
template nn::LossGrad<double> seg_loss_from_logits(const Tensor<double>&, const std::vector<BinaryMask>&);

} // namespace mtcd::seg
