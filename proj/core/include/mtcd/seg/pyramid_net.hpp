#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "mtcd/nn/dense.hpp"
#include "mtcd/nn/softmax.hpp"
#include "mtcd/raster.hpp"
#include "mtcd/seg/pyramid_config.hpp"

namespace mtcd::seg {

using nn::Tensor;

/// Two-channel maps of one deep pyramid. `level` is the 1-based upsampling
/// step j; maps[i-1] is hierarchy i and has the resolution of block i.
template <typename T>
struct FeatureMapSet {
    int level = 1;
    std::vector<Tensor<T>> maps;

    std::vector<std::pair<int, int>> resolutions() const {
        std::vector<std::pair<int, int>> r;
        for (const auto& m : maps) r.emplace_back(m.h(), m.w());
        return r;
    }
};

template <typename T>
struct PyramidOutput {
    std::vector<Tensor<T>> block_outputs;       // one per dense block
    std::vector<FeatureMapSet<T>> levels;       // j = 1 .. structural_levels
    Tensor<T> logits;                           // (N, 2, H, W); channel 0 = iris/pupil
};

/// Per-pixel two-class probabilities and the argmax mask of one image.
struct MaskPrediction {
    RealImage foreground;  // P(iris or pupil)
    RealImage background;
    BinaryMask mask;       // 1 where foreground >= background
};

/// Deconvolve the coarser map 2x, concatenate with the finer map (4 channels),
/// 3x3 convolution, then 1x1 back to 2 channels. All stages are linear and
/// carry biases.
template <typename T>
class Fusion {
public:
    explicit Fusion(nn::Rng& rng);

    /// `fine` is f_{j-1}^i, `coarse` is f_{j-1}^{i+1} at half its size.
    Tensor<T> forward(const Tensor<T>& fine, const Tensor<T>& coarse);
    /// Returns (d/d fine, d/d coarse).
    std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& grad_out);
    void register_state(const std::string& prefix, nn::StateRegistry<T>& reg);
    void set_training(bool on);

    /// Four-channel concatenation from the most recent forward().
    const Tensor<T>& last_concat() const noexcept { return concat_; }

    nn::Deconv2x2<T>& deconv() noexcept { return deconv_; }
    nn::Conv2d<T>& smooth() noexcept { return smooth_; }
    nn::Conv2d<T>& reduce() noexcept { return reduce_; }

private:
    nn::Deconv2x2<T> deconv_;
    nn::Conv2d<T> smooth_;
    nn::Conv2d<T> reduce_;
    Tensor<T> concat_;
};

/// DenseNet backbone returning every dense block's output.
template <typename T>
class Backbone {
public:
    Backbone(const PyramidConfig& config, nn::Rng& rng);

    std::vector<Tensor<T>> forward(const Tensor<T>& image);
    /// `grads[i]` may be empty when block i receives no gradient.
    Tensor<T> backward(const std::vector<Tensor<T>>& grads);
    void register_state(const std::string& prefix, nn::StateRegistry<T>& reg);
    void set_training(bool on);
    int conv_count() const;
    std::vector<int> block_channels() const;

private:
    nn::Conv2d<T> stem_;
    std::vector<std::unique_ptr<nn::DenseBlock<T>>> blocks_;
    std::vector<std::unique_ptr<nn::Sequential<T>>> transitions_;
};

/// The segmentation network.
template <typename T>
class PyramidNet {
public:
    /// Validates the config and initialises weights from `seed`.
    PyramidNet(PyramidConfig config, std::uint64_t seed);

    const PyramidConfig& config() const noexcept { return config_; }

    /// Inputs are (N, 1, H, W) with intensities in [0, 1].
    std::vector<Tensor<T>> backbone_forward(const Tensor<T>& image);
    /// f_1^i = Conv1x1(D_0^i), i is 1-based.
    Tensor<T> reduce_channels(int i, const Tensor<T>& block_output);
    PyramidOutput<T> forward_pyramid(const Tensor<T>& image);
    std::vector<MaskPrediction> predict_mask(const Tensor<T>& image);

    /// Back-propagates d loss / d logits of the most recent forward_pyramid().
    void backward(const Tensor<T>& grad_logits);

    nn::StateRegistry<T>& state() noexcept { return registry_; }
    const nn::StateRegistry<T>& state() const noexcept { return registry_; }
    std::size_t parameter_count() const noexcept { return registry_.parameter_count(); }
    int backbone_conv_count() const { return backbone_.conv_count(); }

    void set_training(bool on);
    bool training() const noexcept { return training_; }

    nn::Conv2d<T>& reducer(int i) { return *reducers_.at(static_cast<std::size_t>(i - 1)); }
    /// Fusion producing f_j^i.
    Fusion<T>& fusion(int j, int i) {
        return *fusions_.at(static_cast<std::size_t>(j - 2)).at(static_cast<std::size_t>(i - 1));
    }
    /// Deconvolutions that bring a truncated pyramid back to input size.
    std::size_t upsampler_count() const noexcept { return upsamplers_.size(); }

private:
    void check_input(const Tensor<T>& image) const;

    PyramidConfig config_;
    nn::Rng rng_;
    Backbone<T> backbone_;
    std::vector<std::unique_ptr<nn::Conv2d<T>>> reducers_;
    std::vector<std::vector<std::unique_ptr<Fusion<T>>>> fusions_;  // [j-2][i-1]
    std::vector<std::unique_ptr<nn::Deconv2x2<T>>> upsamplers_;
    nn::StateRegistry<T> registry_;
    bool training_ = true;
    bool has_forward_ = false;
};

/// Stacks single-channel rasters into an (N, 1, H, W) tensor.
template <typename T>
Tensor<T> images_to_tensor(const std::vector<RealImage>& images);

/// Probabilities and argmax mask (ties go to foreground) from (N, 2, H, W)
/// logits.
std::vector<MaskPrediction> masks_from_logits(const Tensor<double>& logits);
std::vector<MaskPrediction> masks_from_logits(const Tensor<float>& logits);

/// Mean over pixels of the two-class cross-entropy of a probability map
/// against a binary ground truth. Probabilities are clamped at 1e-12.
double seg_loss(const MaskPrediction& pred, const BinaryMask& gt);

/// Cross-entropy and its gradient with respect to (N, 2, H, W) logits.
template <typename T>
nn::LossGrad<T> seg_loss_from_logits(const Tensor<T>& logits, const std::vector<BinaryMask>& gt);

} // namespace mtcd::seg
