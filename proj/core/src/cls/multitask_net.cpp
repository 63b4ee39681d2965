#include "mtcd/cls/multitask_net.hpp"

#include <algorithm>
#include <cmath>

#include "mtcd/nn/dense.hpp"
#include "mtcd/nn/serialize.hpp"

namespace mtcd::cls {

using nn::AvgPool2x2;
using nn::BatchNorm2d;
using nn::Conv2d;
using nn::Rng;
using nn::Sequential;

namespace {

constexpr std::array<std::pair<BackboneKind, const char*>, 5> kBackboneNames{{
    {BackboneKind::resnet50_style, "resnet50_style"},
    {BackboneKind::vgg16_style, "vgg16_style"},
    {BackboneKind::inception_style, "inception_style"},
    {BackboneKind::densenet121_style, "densenet121_style"},
    {BackboneKind::small_scratch, "small_scratch"},
}};

template <typename T>
void conv_bn(Sequential<T>& s, int cin, int cout, int k, bool relu, Rng& rng) {
    s.template emplace<Conv2d<T>>(cin, cout, k, false).init_normal(rng);
    s.template emplace<BatchNorm2d<T>>(cout, relu);
}

template <typename T>
int build_small_scratch(Sequential<T>& s, int base, Rng& rng) {
    conv_bn(s, 1, base, 3, true, rng);
    s.template emplace<AvgPool2x2<T>>();
    int c = base;
    for (int width : {2 * base, 4 * base, 8 * base}) {
        conv_bn(s, c, width, 3, true, rng);
        conv_bn(s, width, width, 3, true, rng);
        s.template emplace<AvgPool2x2<T>>();
        c = width;
    }
    return c;
}

template <typename T>
int build_vgg16(Sequential<T>& s, Rng& rng) {
    const int depth[] = {2, 2, 3, 3, 3};
    const int width[] = {8, 16, 32, 64, 64};
    int c = 1;
    for (int stage = 0; stage < 5; ++stage) {
        for (int l = 0; l < depth[stage]; ++l) {
            conv_bn(s, c, width[stage], 3, true, rng);
            c = width[stage];
        }
        s.template emplace<AvgPool2x2<T>>();
    }
    return c;
}

// Shared stem for the deeper styles: full-resolution conv, then down to 1/4.
template <typename T>
void stem(Sequential<T>& s, int width, Rng& rng) {
    conv_bn(s, 1, width, 3, true, rng);
    s.template emplace<AvgPool2x2<T>>();
    s.template emplace<AvgPool2x2<T>>();
}

template <typename T>
int build_resnet50(Sequential<T>& s, Rng& rng) {
    stem(s, 16, rng);
    const int blocks[] = {3, 4, 6, 3};
    const int mid[] = {8, 16, 32, 64};
    int c = 16;
    for (int stage = 0; stage < 4; ++stage) {
        if (stage > 0) s.template emplace<AvgPool2x2<T>>();
        const int out = mid[stage] * 4;
        for (int b = 0; b < blocks[stage]; ++b) {
            auto body = std::make_unique<Sequential<T>>();
            conv_bn(*body, c, mid[stage], 1, true, rng);
            conv_bn(*body, mid[stage], mid[stage], 3, true, rng);
            conv_bn(*body, mid[stage], out, 1, false, rng);
            std::unique_ptr<Sequential<T>> shortcut;
            if (c != out) {
                shortcut = std::make_unique<Sequential<T>>();
                conv_bn(*shortcut, c, out, 1, false, rng);
            }
            s.add(std::make_unique<nn::Residual<T>>(std::move(body), std::move(shortcut)));
            c = out;
        }
    }
    return c;
}

template <typename T>
int inception(Sequential<T>& s, int cin, int c1, int c3r, int c3, int c5r, int c5, Rng& rng) {
    auto mod = std::make_unique<nn::Branches<T>>();
    conv_bn(mod->add_branch(), cin, c1, 1, true, rng);
    auto& b3 = mod->add_branch();
    conv_bn(b3, cin, c3r, 1, true, rng);
    conv_bn(b3, c3r, c3, 3, true, rng);
    auto& b5 = mod->add_branch();
    conv_bn(b5, cin, c5r, 1, true, rng);
    conv_bn(b5, c5r, c5, 5, true, rng);
    s.add(std::move(mod));
    return c1 + c3 + c5;
}

template <typename T>
int build_inception(Sequential<T>& s, Rng& rng) {
    conv_bn(s, 1, 16, 3, true, rng);
    s.template emplace<AvgPool2x2<T>>();
    conv_bn(s, 16, 32, 3, true, rng);
    s.template emplace<AvgPool2x2<T>>();
    int c = inception(s, 32, 16, 16, 24, 4, 8, rng);
    c = inception(s, c, 24, 24, 32, 8, 8, rng);
    s.template emplace<AvgPool2x2<T>>();
    c = inception(s, c, 32, 32, 48, 8, 16, rng);
    s.template emplace<AvgPool2x2<T>>();
    return inception(s, c, 48, 48, 64, 12, 16, rng);
}

template <typename T>
int build_densenet121(Sequential<T>& s, Rng& rng) {
    stem(s, 16, rng);
    const int layers[] = {6, 12, 24, 16};
    const int growth = 8;
    int c = 16;
    for (int b = 0; b < 4; ++b) {
        auto& block = s.template emplace<nn::DenseBlock<T>>(c, layers[b], growth, 4 * growth, rng);
        c = block.out_channels();
        if (b < 3) {
            s.add(nn::make_transition<T>(c, c / 2, rng));
            c /= 2;
        }
    }
    s.template emplace<BatchNorm2d<T>>(c, true);
    return c;
}

template <typename T>
nn::Linear<T>* build_head(Sequential<T>& head, int in, const std::vector<int>& hidden, int out, Rng& rng) {
    for (int w : hidden) {
        head.template emplace<nn::Linear<T>>(in, w).init_default(rng);
        head.template emplace<nn::ReLU<T>>();
        in = w;
    }
    auto& last = head.template emplace<nn::Linear<T>>(in, out);
    last.init_default(rng);
    return &last;
}

} // namespace

std::string to_string(BackboneKind kind) {
    for (const auto& [k, name] : kBackboneNames)
        if (k == kind) return name;
    throw ParameterError("unknown backbone kind");
}

BackboneKind backbone_from_string(const std::string& name) {
    for (const auto& [k, n] : kBackboneNames)
        if (name == n) return k;
    throw ParameterError("unknown backbone '" + name + "'");
}

int ClassifierConfig::input_multiple() const {
    switch (backbone) {
    case BackboneKind::small_scratch:
    case BackboneKind::inception_style:
        return 16;
    case BackboneKind::vgg16_style:
    case BackboneKind::resnet50_style:
    case BackboneKind::densenet121_style:
        return 32;
    }
    return 32;
}

void ClassifierConfig::validate() const {
    const int m = input_multiple();
    if (input_height <= 0 || input_width <= 0 || input_height % m != 0 || input_width % m != 0)
        throw ParameterError("classifier input size must be a positive multiple of " + std::to_string(m) +
                             " for " + to_string(backbone));
    if (scratch_width <= 0) throw ParameterError("scratch_width must be positive");
    for (const auto* widths : {&head_t1_widths, &head_t2_widths})
        for (int w : *widths)
            if (w <= 0) throw ParameterError("head widths must be positive");
}

void to_json(nlohmann::json& j, const ClassifierConfig& c) {
    j = {{"backbone", to_string(c.backbone)},
         {"head_t1_widths", c.head_t1_widths},
         {"head_t2_widths", c.head_t2_widths},
         {"scratch_width", c.scratch_width},
         {"input_size", {c.input_height, c.input_width}}};
    if (c.pretrained_weights_path) j["pretrained_weights_path"] = *c.pretrained_weights_path;
}

void from_json(const nlohmann::json& j, ClassifierConfig& c) {
    c = ClassifierConfig{};
    if (j.contains("backbone")) c.backbone = backbone_from_string(j.at("backbone").get<std::string>());
    if (j.contains("pretrained_weights_path") && !j.at("pretrained_weights_path").is_null())
        c.pretrained_weights_path = j.at("pretrained_weights_path").get<std::string>();
    if (j.contains("head_t1_widths")) c.head_t1_widths = j.at("head_t1_widths").get<std::vector<int>>();
    if (j.contains("head_t2_widths")) c.head_t2_widths = j.at("head_t2_widths").get<std::vector<int>>();
    if (j.contains("scratch_width")) c.scratch_width = j.at("scratch_width").get<int>();
    if (j.contains("input_size")) {
        c.input_height = j.at("input_size").at(0).get<int>();
        c.input_width = j.at("input_size").at(1).get<int>();
    }
}

int MultitaskOutput::predicted_t2() const noexcept {
    return static_cast<int>(std::max_element(dist_t2.begin(), dist_t2.end()) - dist_t2.begin());
}

double bce(double p, int y) {
    const double pc = std::clamp(p, kProbEps, 1.0 - kProbEps);
    return y ? -std::log(pc) : -std::log(1.0 - pc);
}

double cce(const std::array<double, 3>& dist, int y) {
    if (y < 0 || y > 2) throw ValidationError("T2 label must be 0, 1 or 2");
    return -std::log(std::max(dist[static_cast<std::size_t>(y)], kProbEps));
}

double total_loss(double p, int y1, const std::array<double, 3>& dist, int y2, LossWeights w) {
    if (w.lambda < 0) throw ParameterError("lambda must be non-negative");
    return w.lambda * bce(p, y1) + cce(dist, y2);
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::array<double, 3> softmax3(double a, double b, double c) {
    const double m = std::max({a, b, c});
    const double ea = std::exp(a - m), eb = std::exp(b - m), ec = std::exp(c - m);
    const double s = ea + eb + ec;
    return {ea / s, eb / s, ec / s};
}

template <typename T>
std::vector<MultitaskOutput> outputs_from_logits(const MultitaskLogits<T>& logits) {
    std::vector<MultitaskOutput> out(static_cast<std::size_t>(logits.t1.n()));
    for (int i = 0; i < logits.t1.n(); ++i) {
        auto& o = out[static_cast<std::size_t>(i)];
        o.p_t1 = sigmoid(logits.t1(i, 0, 0, 0));
        o.dist_t2 = softmax3(logits.t2(i, 0, 0, 0), logits.t2(i, 1, 0, 0), logits.t2(i, 2, 0, 0));
    }
    return out;
}

template <typename T>
MultitaskLossGrad<T> multitask_loss(const MultitaskLogits<T>& logits, const std::vector<int>& y1,
                                    const std::vector<int>& y2, LossWeights w) {
    const int n = logits.t1.n();
    if (y1.size() != static_cast<std::size_t>(n) || y2.size() != static_cast<std::size_t>(n))
        throw ShapeError("multitask_loss: label count does not match batch");
    if (w.lambda < 0) throw ParameterError("lambda must be non-negative");
    MultitaskLossGrad<T> r;
    r.grad_t1 = Tensor<T>(n, 1, 1, 1);
    r.grad_t2 = Tensor<T>(n, 3, 1, 1);
    const auto outs = outputs_from_logits(logits);
    for (int i = 0; i < n; ++i) {
        const auto& o = outs[static_cast<std::size_t>(i)];
        const int a = y1[static_cast<std::size_t>(i)];
        const int b = y2[static_cast<std::size_t>(i)];
        if (a != 0 && a != 1) throw ValidationError("T1 label must be 0 or 1");
        const double l1 = bce(o.p_t1, a);
        const double l2 = cce(o.dist_t2, b);
        r.bce += l1 / n;
        r.cce += l2 / n;
        r.loss += (w.lambda * l1 + l2) / n;
        // Inside the clamp the sigmoid/softmax Jacobians collapse to p - y;
        // outside it the clamped loss is flat.
        if (o.p_t1 > kProbEps && o.p_t1 < 1.0 - kProbEps)
            r.grad_t1(i, 0, 0, 0) = static_cast<T>(w.lambda * (o.p_t1 - a) / n);
        if (o.dist_t2[static_cast<std::size_t>(b)] > kProbEps)
            for (int k = 0; k < 3; ++k)
                r.grad_t2(i, k, 0, 0) =
                    static_cast<T>((o.dist_t2[static_cast<std::size_t>(k)] - (k == b ? 1.0 : 0.0)) / n);
    }
    return r;
}

template <typename T>
MultitaskNet<T>::MultitaskNet(ClassifierConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    Rng rng(seed);
    switch (config_.backbone) {
    case BackboneKind::small_scratch: feature_dim_ = build_small_scratch(backbone_, config_.scratch_width, rng); break;
    case BackboneKind::vgg16_style: feature_dim_ = build_vgg16(backbone_, rng); break;
    case BackboneKind::resnet50_style: feature_dim_ = build_resnet50(backbone_, rng); break;
    case BackboneKind::inception_style: feature_dim_ = build_inception(backbone_, rng); break;
    case BackboneKind::densenet121_style: feature_dim_ = build_densenet121(backbone_, rng); break;
    }
    backbone_.template emplace<nn::GlobalAvgPool<T>>();
    out_t1_ = build_head(head_t1_, feature_dim_, config_.head_t1_widths, 1, rng);
    out_t2_ = build_head(head_t2_, feature_dim_, config_.head_t2_widths, 3, rng);

    backbone_.register_state("backbone", registry_);
    head_t1_.register_state("head_t1", registry_);
    head_t2_.register_state("head_t2", registry_);

    if (config_.pretrained_weights_path)
        nn::load_weights(*config_.pretrained_weights_path, registry_, "backbone.");
}

template <typename T>
MultitaskLogits<T> MultitaskNet<T>::forward(const Tensor<T>& roi) {
    if (roi.c() != 1 || roi.h() != config_.input_height || roi.w() != config_.input_width || roi.n() < 1)
        throw ShapeError("classifier expects (N, 1, " + std::to_string(config_.input_height) + ", " +
                         std::to_string(config_.input_width) + ") input, got " + nn::shape_string(roi.shape()));
    MultitaskLogits<T> out;
    out.features = backbone_.forward(roi);
    out.t1 = head_t1_.forward(out.features);
    out.t2 = head_t2_.forward(out.features);
    return out;
}

template <typename T>
std::vector<MultitaskOutput> MultitaskNet<T>::cls_forward(const Tensor<T>& roi) {
    return outputs_from_logits(forward(roi));
}

template <typename T>
void MultitaskNet<T>::backward(const Tensor<T>& grad_t1, const Tensor<T>& grad_t2) {
    Tensor<T> g = head_t1_.backward(grad_t1);
    nn::add_inplace(g, head_t2_.backward(grad_t2));
    backbone_.backward(g);
}

template <typename T>
void MultitaskNet<T>::zero_heads() {
    out_t1_->zero();
    out_t2_->zero();
}

template <typename T>
void MultitaskNet<T>::set_training(bool on) {
    backbone_.set_training(on);
    head_t1_.set_training(on);
    head_t2_.set_training(on);
}

template class MultitaskNet<float>;
template class MultitaskNet<double>;
template std::vector<MultitaskOutput> outputs_from_logits(const MultitaskLogits<float>&);
template std::vector<MultitaskOutput> outputs_from_logits(const MultitaskLogits<double>&);
template MultitaskLossGrad<float> multitask_loss(const MultitaskLogits<float>&, const std::vector<int>&,
                                                 const std::vector<int>&, LossWeights);
template MultitaskLossGrad<double> multitask_loss(const MultitaskLogits<double>&, const std::vector<int>&,
                                                  const std::vector<int>&, LossWeights);

} // namespace mtcd::cls
