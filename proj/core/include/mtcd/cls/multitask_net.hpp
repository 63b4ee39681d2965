#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtcd/nn/blocks.hpp"

namespace mtcd::cls {

using nn::Tensor;

enum class BackboneKind { resnet50_style, vgg16_style, inception_style, densenet121_style, small_scratch };

std::string to_string(BackboneKind kind);
BackboneKind backbone_from_string(const std::string& name);

struct ClassifierConfig {
    BackboneKind backbone = BackboneKind::small_scratch;
    /// Weights blob whose "backbone." tensors replace the random initialisation.
    std::optional<std::string> pretrained_weights_path;
    /// Hidden fully-connected widths in front of each head's output layer.
    std::vector<int> head_t1_widths;
    std::vector<int> head_t2_widths;
    /// First-stage width of small_scratch; later stages double it.
    int scratch_width = 16;
    int input_height = 224;
    int input_width = 224;

    void validate() const;
    /// Spatial size must be a multiple of this for the chosen backbone.
    int input_multiple() const;
};

void to_json(nlohmann::json& j, const ClassifierConfig& c);
void from_json(const nlohmann::json& j, ClassifierConfig& c);

/// T2 class order. T1 uses 1 = unhealthy.
enum T2Class : int { kPreCataract = 0, kPostCataract = 1, kOthers = 2 };

struct MultitaskOutput {
    double p_t1 = 0.5;                   // P(unhealthy)
    std::array<double, 3> dist_t2{};     // (pre, post, others)

    int predicted_t1() const noexcept { return p_t1 >= 0.5 ? 1 : 0; }
    int predicted_t2() const noexcept;
};

struct LossWeights {
    double lambda = 0.5;
};

inline constexpr double kProbEps = 1e-7;

/// Binary cross-entropy with p clamped to [eps, 1 - eps].
double bce(double p, int y);
/// -log(dist[y]) with dist[y] clamped below at eps.
double cce(const std::array<double, 3>& dist, int y);
double total_loss(double p, int y1, const std::array<double, 3>& dist, int y2, LossWeights w);

/// Raw head outputs for a batch.
template <typename T>
struct MultitaskLogits {
    Tensor<T> t1;        // (N, 1, 1, 1)
    Tensor<T> t2;        // (N, 3, 1, 1)
    Tensor<T> features;  // (N, F, 1, 1), the pooled shared features
};

double sigmoid(double z);
std::array<double, 3> softmax3(double a, double b, double c);

template <typename T>
std::vector<MultitaskOutput> outputs_from_logits(const MultitaskLogits<T>& logits);

template <typename T>
struct MultitaskLossGrad {
    double loss = 0;  // batch mean of lambda * bce + cce
    double bce = 0;
    double cce = 0;
    Tensor<T> grad_t1;
    Tensor<T> grad_t2;
};

template <typename T>
MultitaskLossGrad<T> multitask_loss(const MultitaskLogits<T>& logits, const std::vector<int>& y1,
                                    const std::vector<int>& y2, LossWeights w);

/// Shared convolutional backbone, global average pooling, and one head per
/// task (sigmoid T1, softmax T2).
template <typename T>
class MultitaskNet {
public:
    MultitaskNet(ClassifierConfig config, std::uint64_t seed);

    const ClassifierConfig& config() const noexcept { return config_; }

    /// `roi` is (N, 1, H, W) in [0, 1].
    MultitaskLogits<T> forward(const Tensor<T>& roi);
    std::vector<MultitaskOutput> cls_forward(const Tensor<T>& roi);
    /// Back-propagates head-logit gradients of the most recent forward().
    void backward(const Tensor<T>& grad_t1, const Tensor<T>& grad_t2);

    /// Sets the output layer of both heads to zero.
    void zero_heads();

    nn::StateRegistry<T>& state() noexcept { return registry_; }
    const nn::StateRegistry<T>& state() const noexcept { return registry_; }
    std::size_t parameter_count() const noexcept { return registry_.parameter_count(); }
    int feature_dim() const noexcept { return feature_dim_; }
    int conv_count() const { return backbone_.conv_count(); }

    void set_training(bool on);

private:
    ClassifierConfig config_;
    nn::Sequential<T> backbone_;  // ends with global average pooling
    nn::Sequential<T> head_t1_;
    nn::Sequential<T> head_t2_;
    nn::Linear<T>* out_t1_ = nullptr;
    nn::Linear<T>* out_t2_ = nullptr;
    int feature_dim_ = 0;
    nn::StateRegistry<T> registry_;
};

} // namespace mtcd::cls
