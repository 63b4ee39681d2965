#include "mtcd/nn/layers.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace mtcd::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
void fill_normal(Tensor<T>& t, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t.values()) v = static_cast<T>(dist(rng));
}

} // namespace

template <typename T>
void Layer<T>::require_cache(bool present, const char* layer) const {
    if (!present)
        throw Error(std::string(layer) + ": backward() without a training-mode forward()");
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, bool bias)
    : cin_(in_channels), cout_(out_channels), k_(kernel), has_bias_(bias),
      weight_(out_channels, in_channels, kernel, kernel), bias_(1, out_channels, 1, 1) {
    if (in_channels <= 0 || out_channels <= 0) throw ParameterError("Conv2d: channels must be positive");
    if (kernel <= 0 || kernel % 2 == 0) throw ParameterError("Conv2d: kernel must be odd");
}

template <typename T>
void Conv2d<T>::init_normal(Rng& rng, double gain) {
    fill_normal(weight_.value, std::sqrt(gain / (cin_ * k_ * k_)), rng);
    bias_.value.zero();
}

template <typename T>
void Conv2d<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    reg.add_parameter(prefix + ".weight", weight_);
    if (has_bias_) reg.add_parameter(prefix + ".bias", bias_);
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
    Tensor<T> y = run(x);
    if (k_ == 1) cached_ = this->training_ ? x : Tensor<T>();
    return y;
}

template <typename T>
Tensor<T> Conv2d<T>::forward_owned(Tensor<T>&& x) {
    Tensor<T> y = run(x);
    if (k_ == 1) cached_ = this->training_ ? std::move(x) : Tensor<T>();
    return y;
}

template <typename T>
Tensor<T> Conv2d<T>::run(const Tensor<T>& x) {
    if (x.c() != cin_)
        throw ShapeError("Conv2d: expected " + std::to_string(cin_) + " channels, got " +
                         std::to_string(x.c()));
    const int n = x.n(), h = x.h(), w = x.w();
    in_h_ = h;
    in_w_ = w;
    auto y = Tensor<T>::uninitialized(n, cout_, h, w);
    const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;

    if (k_ == 1) {
        ConstMatMap<T> wm(weight_.value.data(), cout_, cin_);
        for (int i = 0; i < n; ++i) {
            ConstMatMap<T> xm(x.sample(i), cin_, hw);
            MatMap<T> ym(y.sample(i), cout_, hw);
            ym.noalias() = wm * xm;
        }
    } else {
        const int pad = k_ / 2;
        const int hp = h + 2 * pad, wp = w + 2 * pad;
        const Eigen::Index plane = static_cast<Eigen::Index>(hp) * wp;
        const Eigen::Index span = static_cast<Eigen::Index>(h - 1) * wp + w;
        const int taps = k_ * k_;

        // Tap-major copy of the weights: taps x (cout x cin).
        std::vector<T, PooledAllocator<T>> packed(static_cast<std::size_t>(taps) * cout_ * cin_);
        for (int co = 0; co < cout_; ++co)
            for (int ci = 0; ci < cin_; ++ci)
                for (int t = 0; t < taps; ++t)
                    packed[(static_cast<std::size_t>(t) * cout_ + co) * cin_ + ci] =
                        weight_.value.data()[(static_cast<std::size_t>(co) * cin_ + ci) * taps + t];

        Tensor<T> padded(n, cin_, hp, wp);
        RowMat<T> acc(cout_, span);
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < cin_; ++c) {
                const T* src = x.channel(i, c);
                T* dst = padded.channel(i, c);
                for (int yy = 0; yy < h; ++yy)
                    std::copy_n(src + static_cast<std::size_t>(yy) * w, w,
                                dst + static_cast<std::size_t>(yy + pad) * wp + pad);
            }
            acc.setZero();
            for (int t = 0; t < taps; ++t) {
                const Eigen::Index off = static_cast<Eigen::Index>(t / k_) * wp + t % k_;
                ConstMatMap<T> wt(packed.data() + static_cast<std::size_t>(t) * cout_ * cin_, cout_, cin_);
                ConstStridedMap<T> xs(padded.sample(i) + off, cin_, span, Eigen::OuterStride<>(plane));
                acc.noalias() += wt * xs;
            }
            for (int co = 0; co < cout_; ++co) {
                T* dst = y.channel(i, co);
                const T* src = acc.data() + static_cast<std::size_t>(co) * span;
                for (int yy = 0; yy < h; ++yy)
                    std::copy_n(src + static_cast<std::size_t>(yy) * wp, w,
                                dst + static_cast<std::size_t>(yy) * w);
            }
        }
        cached_ = this->training_ ? std::move(padded) : Tensor<T>();
    }

    if (has_bias_) {
        for (int i = 0; i < n; ++i)
            for (int co = 0; co < cout_; ++co) {
                const T b = bias_.value[static_cast<std::size_t>(co)];
                T* p = y.channel(i, co);
                for (Eigen::Index k = 0; k < hw; ++k) p[k] += b;
            }
    }
    return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& g) {
    this->require_cache(!cached_.empty(), "Conv2d");
    const int n = g.n(), h = in_h_, w = in_w_;
    if (g.c() != cout_ || g.h() != h || g.w() != w) throw ShapeError("Conv2d::backward: gradient shape");
    const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
    auto gx = Tensor<T>::uninitialized(n, cin_, h, w);

    if (has_bias_) {
        for (int i = 0; i < n; ++i)
            for (int co = 0; co < cout_; ++co) {
                const T* p = g.channel(i, co);
                double s = 0;
                for (Eigen::Index k = 0; k < hw; ++k) s += p[k];
                bias_.grad[static_cast<std::size_t>(co)] += static_cast<T>(s);
            }
    }

    if (k_ == 1) {
        ConstMatMap<T> wm(weight_.value.data(), cout_, cin_);
        MatMap<T> gw(weight_.grad.data(), cout_, cin_);
        for (int i = 0; i < n; ++i) {
            ConstMatMap<T> gm(g.sample(i), cout_, hw);
            ConstMatMap<T> xm(cached_.sample(i), cin_, hw);
            gw.noalias() += gm * xm.transpose();
            MatMap<T> gxm(gx.sample(i), cin_, hw);
            gxm.noalias() = wm.transpose() * gm;
        }
        return gx;
    }

    const int pad = k_ / 2;
    const int hp = h + 2 * pad, wp = w + 2 * pad;
    const Eigen::Index plane = static_cast<Eigen::Index>(hp) * wp;
    const Eigen::Index span = static_cast<Eigen::Index>(h - 1) * wp + w;
    const int taps = k_ * k_;

    std::vector<T, PooledAllocator<T>> packed(static_cast<std::size_t>(taps) * cout_ * cin_);
    std::vector<T, PooledAllocator<T>> packed_grad(packed.size(), T{});
    for (int co = 0; co < cout_; ++co)
        for (int ci = 0; ci < cin_; ++ci)
            for (int t = 0; t < taps; ++t)
                packed[(static_cast<std::size_t>(t) * cout_ + co) * cin_ + ci] =
                    weight_.value.data()[(static_cast<std::size_t>(co) * cin_ + ci) * taps + t];

    RowMat<T> gext(cout_, span);
    RowMat<T> gpad(cin_, plane);
    for (int i = 0; i < n; ++i) {
        gext.setZero();
        for (int co = 0; co < cout_; ++co) {
            const T* src = g.channel(i, co);
            T* dst = gext.data() + static_cast<std::size_t>(co) * span;
            for (int yy = 0; yy < h; ++yy)
                std::copy_n(src + static_cast<std::size_t>(yy) * w, w,
                            dst + static_cast<std::size_t>(yy) * wp);
        }
        gpad.setZero();
        for (int t = 0; t < taps; ++t) {
            const Eigen::Index off = static_cast<Eigen::Index>(t / k_) * wp + t % k_;
            ConstStridedMap<T> xs(cached_.sample(i) + off, cin_, span, Eigen::OuterStride<>(plane));
            MatMap<T> gwt(packed_grad.data() + static_cast<std::size_t>(t) * cout_ * cin_, cout_, cin_);
            gwt.noalias() += gext * xs.transpose();
            ConstMatMap<T> wt(packed.data() + static_cast<std::size_t>(t) * cout_ * cin_, cout_, cin_);
            StridedMap<T> gs(gpad.data() + off, cin_, span, Eigen::OuterStride<>(plane));
            gs.noalias() += wt.transpose() * gext;
        }
        for (int c = 0; c < cin_; ++c) {
            const T* src = gpad.data() + static_cast<std::size_t>(c) * plane;
            T* dst = gx.channel(i, c);
            for (int yy = 0; yy < h; ++yy)
                std::copy_n(src + static_cast<std::size_t>(yy + pad) * wp + pad, w,
                            dst + static_cast<std::size_t>(yy) * w);
        }
    }
    for (int co = 0; co < cout_; ++co)
        for (int ci = 0; ci < cin_; ++ci)
            for (int t = 0; t < taps; ++t)
                weight_.grad.data()[(static_cast<std::size_t>(co) * cin_ + ci) * taps + t] +=
                    packed_grad[(static_cast<std::size_t>(t) * cout_ + co) * cin_ + ci];
    return gx;
}

// ------------------------------------------------------------- Deconv2x2

template <typename T>
Deconv2x2<T>::Deconv2x2(int in_channels, int out_channels, bool bias)
    : cin_(in_channels), cout_(out_channels), has_bias_(bias),
      weight_(in_channels, out_channels, 2, 2), bias_(1, out_channels, 1, 1) {
    if (in_channels <= 0 || out_channels <= 0) throw ParameterError("Deconv2x2: channels must be positive");
}

template <typename T>
void Deconv2x2<T>::init_normal(Rng& rng, double gain) {
    fill_normal(weight_.value, std::sqrt(gain / cin_), rng);
    bias_.value.zero();
}

template <typename T>
void Deconv2x2<T>::set_nearest_neighbor() {
    weight_.value.zero();
    for (int c = 0; c < std::min(cin_, cout_); ++c)
        for (int t = 0; t < 4; ++t)
            weight_.value[(static_cast<std::size_t>(c) * cout_ + c) * 4 + t] = T(1);
    bias_.value.zero();
}

template <typename T>
void Deconv2x2<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    reg.add_parameter(prefix + ".weight", weight_);
    if (has_bias_) reg.add_parameter(prefix + ".bias", bias_);
}

template <typename T>
Tensor<T> Deconv2x2<T>::forward(const Tensor<T>& x) {
    if (x.c() != cin_) throw ShapeError("Deconv2x2: channel mismatch");
    const int n = x.n(), h = x.h(), w = x.w();
    const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
    // weight (cin, cout*4) viewed row-major; transpose gives (cout*4, cin).
    ConstMatMap<T> wm(weight_.value.data(), cin_, static_cast<Eigen::Index>(cout_) * 4);
    auto y = Tensor<T>::uninitialized(n, cout_, 2 * h, 2 * w);
    RowMat<T> cells(static_cast<Eigen::Index>(cout_) * 4, hw);
    for (int i = 0; i < n; ++i) {
        ConstMatMap<T> xm(x.sample(i), cin_, hw);
        cells.noalias() = wm.transpose() * xm;
        for (int co = 0; co < cout_; ++co) {
            const T b = has_bias_ ? bias_.value[static_cast<std::size_t>(co)] : T{};
            T* dst = y.channel(i, co);
            for (int t = 0; t < 4; ++t) {
                const int dy = t / 2, dx = t % 2;
                const T* src = cells.data() + (static_cast<std::size_t>(co) * 4 + t) * hw;
                for (int yy = 0; yy < h; ++yy)
                    for (int xx = 0; xx < w; ++xx)
                        dst[static_cast<std::size_t>(2 * yy + dy) * (2 * w) + 2 * xx + dx] =
                            src[static_cast<std::size_t>(yy) * w + xx] + b;
            }
        }
    }
    if (this->training_)
        cached_ = x;
    else
        cached_ = Tensor<T>();
    return y;
}

template <typename T>
Tensor<T> Deconv2x2<T>::backward(const Tensor<T>& g) {
    this->require_cache(!cached_.empty(), "Deconv2x2");
    const int n = cached_.n(), h = cached_.h(), w = cached_.w();
    if (g.c() != cout_ || g.h() != 2 * h || g.w() != 2 * w) throw ShapeError("Deconv2x2::backward: gradient shape");
    const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
    ConstMatMap<T> wm(weight_.value.data(), cin_, static_cast<Eigen::Index>(cout_) * 4);
    MatMap<T> gw(weight_.grad.data(), cin_, static_cast<Eigen::Index>(cout_) * 4);
    auto gx = Tensor<T>::uninitialized(n, cin_, h, w);
    RowMat<T> cells(static_cast<Eigen::Index>(cout_) * 4, hw);
    for (int i = 0; i < n; ++i) {
        for (int co = 0; co < cout_; ++co) {
            const T* src = g.channel(i, co);
            double bsum = 0;
            for (int t = 0; t < 4; ++t) {
                const int dy = t / 2, dx = t % 2;
                T* dst = cells.data() + (static_cast<std::size_t>(co) * 4 + t) * hw;
                for (int yy = 0; yy < h; ++yy)
                    for (int xx = 0; xx < w; ++xx) {
                        const T v = src[static_cast<std::size_t>(2 * yy + dy) * (2 * w) + 2 * xx + dx];
                        dst[static_cast<std::size_t>(yy) * w + xx] = v;
                        bsum += v;
                    }
            }
            if (has_bias_) bias_.grad[static_cast<std::size_t>(co)] += static_cast<T>(bsum);
        }
        ConstMatMap<T> xm(cached_.sample(i), cin_, hw);
        gw.noalias() += xm * cells.transpose();
        MatMap<T> gxm(gx.sample(i), cin_, hw);
        gxm.noalias() = wm * cells;
    }
    return gx;
}

// ----------------------------------------------------------- BatchNorm2d

namespace {
template <typename T>
using ArrayMap = Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstArrayMap = Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>;
} // namespace

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels, bool relu, double momentum, double eps)
    : channels_(channels), relu_(relu), momentum_(momentum), eps_(eps), gamma_(1, channels, 1, 1),
      beta_(1, channels, 1, 1), running_mean_(1, channels, 1, 1), running_var_(1, channels, 1, 1, T(1)) {
    gamma_.value.fill(T(1));
}

template <typename T>
void BatchNorm2d<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    reg.add_parameter(prefix + ".gamma", gamma_);
    reg.add_parameter(prefix + ".beta", beta_);
    reg.add_buffer(prefix + ".running_mean", running_mean_);
    reg.add_buffer(prefix + ".running_var", running_var_);
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x) {
    if (x.c() != channels_) throw ShapeError("BatchNorm2d: channel mismatch");
    const int n = x.n();
    const auto plane = static_cast<Eigen::Index>(x.plane());
    auto y = Tensor<T>::uninitialized(x.n(), x.c(), x.h(), x.w());

    auto emit = [&](int i, int c, T scale, T shift) {
        ConstArrayMap<T> src(x.channel(i, c), plane);
        ArrayMap<T> dst(y.channel(i, c), plane);
        if (relu_)
            dst = (src * scale + shift).max(T(0));
        else
            dst = src * scale + shift;
    };

    if (!this->training_) {
        for (int c = 0; c < channels_; ++c) {
            const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[c]) + eps_);
            const T scale = static_cast<T>(gamma_.value[c] * inv);
            const T shift = static_cast<T>(beta_.value[c] - running_mean_[c] * gamma_.value[c] * inv);
            for (int i = 0; i < n; ++i) emit(i, c, scale, shift);
        }
        xhat_ = Tensor<T>();
        return y;
    }

    const double count = static_cast<double>(n) * static_cast<double>(plane);
    if (count < 2) throw ShapeError("BatchNorm2d: training needs more than one value per channel");
    xhat_ = Tensor<T>::uninitialized(x.n(), x.c(), x.h(), x.w());
    inv_std_.assign(static_cast<std::size_t>(channels_), 0.0);
    for (int c = 0; c < channels_; ++c) {
        double sum = 0;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(ConstArrayMap<T>(x.channel(i, c), plane).sum());
        const double mean = sum / count;
        double sq = 0;
        for (int i = 0; i < n; ++i)
            sq += static_cast<double>(
                (ConstArrayMap<T>(x.channel(i, c), plane) - static_cast<T>(mean)).square().sum());
        const double var = sq / count;
        const double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[static_cast<std::size_t>(c)] = inv;
        for (int i = 0; i < n; ++i) {
            ArrayMap<T> xh(xhat_.channel(i, c), plane);
            xh = (ConstArrayMap<T>(x.channel(i, c), plane) - static_cast<T>(mean)) * static_cast<T>(inv);
            ArrayMap<T> dst(y.channel(i, c), plane);
            if (relu_)
                dst = (xh * gamma_.value[c] + beta_.value[c]).max(T(0));
            else
                dst = xh * gamma_.value[c] + beta_.value[c];
        }
        running_mean_[c] = static_cast<T>((1 - momentum_) * running_mean_[c] + momentum_ * mean);
        running_var_[c] = static_cast<T>((1 - momentum_) * running_var_[c] +
                                         momentum_ * var * count / (count - 1));
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& g) {
    this->require_cache(!xhat_.empty(), "BatchNorm2d");
    require_same_shape(g, xhat_, "BatchNorm2d::backward");
    const int n = g.n();
    const auto plane = static_cast<Eigen::Index>(g.plane());
    const double count = static_cast<double>(n) * static_cast<double>(plane);
    auto gx = Tensor<T>::uninitialized(g.n(), g.c(), g.h(), g.w());
    for (int c = 0; c < channels_; ++c) {
        const T gam = gamma_.value[c], bet = beta_.value[c];
        // Gradient after the ReLU gate, written into gx as scratch.
        for (int i = 0; i < n; ++i) {
            ArrayMap<T> gg(gx.channel(i, c), plane);
            ConstArrayMap<T> gp(g.channel(i, c), plane);
            if (relu_) {
                ConstArrayMap<T> xh(xhat_.channel(i, c), plane);
                gg = ((xh * gam + bet) > T(0)).select(gp, T(0));
            } else {
                gg = gp;
            }
        }
        double sum_g = 0, sum_gx = 0;
        for (int i = 0; i < n; ++i) {
            ConstArrayMap<T> gg(gx.channel(i, c), plane);
            ConstArrayMap<T> xh(xhat_.channel(i, c), plane);
            sum_g += static_cast<double>(gg.sum());
            sum_gx += static_cast<double>((gg * xh).sum());
        }
        gamma_.grad[c] += static_cast<T>(sum_gx);
        beta_.grad[c] += static_cast<T>(sum_g);
        const T scale = static_cast<T>(gam * inv_std_[static_cast<std::size_t>(c)]);
        const T mg = static_cast<T>(sum_g / count), mgx = static_cast<T>(sum_gx / count);
        for (int i = 0; i < n; ++i) {
            ArrayMap<T> gg(gx.channel(i, c), plane);
            ConstArrayMap<T> xh(xhat_.channel(i, c), plane);
            gg = scale * (gg - mg - xh * mgx);
        }
    }
    return gx;
}

// ------------------------------------------------------------------ ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x) {
    Tensor<T> y = x;
    for (auto& v : y.values()) v = v > T(0) ? v : T(0);
    if (this->training_)
        output_ = y;
    else
        output_ = Tensor<T>();
    return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& g) {
    this->require_cache(!output_.empty(), "ReLU");
    require_same_shape(g, output_, "ReLU::backward");
    Tensor<T> gx = g;
    for (std::size_t k = 0; k < gx.size(); ++k)
        if (!(output_[k] > T(0))) gx[k] = T(0);
    return gx;
}

// ------------------------------------------------------------ AvgPool2x2

template <typename T>
Tensor<T> AvgPool2x2<T>::forward(const Tensor<T>& x) {
    if (x.h() % 2 != 0 || x.w() % 2 != 0) throw ShapeError("AvgPool2x2: odd spatial size");
    const int oh = x.h() / 2, ow = x.w() / 2;
    auto y = Tensor<T>::uninitialized(x.n(), x.c(), oh, ow);
    for (int i = 0; i < x.n(); ++i)
        for (int c = 0; c < x.c(); ++c) {
            const T* src = x.channel(i, c);
            T* dst = y.channel(i, c);
            for (int yy = 0; yy < oh; ++yy) {
                const T* r0 = src + static_cast<std::size_t>(2 * yy) * x.w();
                const T* r1 = r0 + x.w();
                for (int xx = 0; xx < ow; ++xx)
                    dst[static_cast<std::size_t>(yy) * ow + xx] =
                        (r0[2 * xx] + r0[2 * xx + 1] + r1[2 * xx] + r1[2 * xx + 1]) * T(0.25);
            }
        }
    in_shape_ = x.shape();
    cached_ = this->training_;
    return y;
}

template <typename T>
Tensor<T> AvgPool2x2<T>::backward(const Tensor<T>& g) {
    this->require_cache(cached_, "AvgPool2x2");
    auto gx = Tensor<T>::uninitialized(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    if (g.n() != gx.n() || g.c() != gx.c() || g.h() * 2 != gx.h() || g.w() * 2 != gx.w())
        throw ShapeError("AvgPool2x2::backward: gradient shape");
    for (int i = 0; i < g.n(); ++i)
        for (int c = 0; c < g.c(); ++c) {
            const T* src = g.channel(i, c);
            T* dst = gx.channel(i, c);
            for (int yy = 0; yy < g.h(); ++yy)
                for (int xx = 0; xx < g.w(); ++xx) {
                    const T v = src[static_cast<std::size_t>(yy) * g.w() + xx] * T(0.25);
                    T* r0 = dst + static_cast<std::size_t>(2 * yy) * gx.w();
                    T* r1 = r0 + gx.w();
                    r0[2 * xx] = r0[2 * xx + 1] = r1[2 * xx] = r1[2 * xx + 1] = v;
                }
        }
    return gx;
}

// --------------------------------------------------------- GlobalAvgPool

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x) {
    Tensor<T> y(x.n(), x.c(), 1, 1);
    const std::size_t plane = x.plane();
    for (int i = 0; i < x.n(); ++i)
        for (int c = 0; c < x.c(); ++c) {
            const T* src = x.channel(i, c);
            double s = 0;
            for (std::size_t k = 0; k < plane; ++k) s += src[k];
            y(i, c, 0, 0) = static_cast<T>(s / static_cast<double>(plane));
        }
    in_shape_ = x.shape();
    cached_ = this->training_;
    return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& g) {
    this->require_cache(cached_, "GlobalAvgPool");
    Tensor<T> gx(in_shape_[0], in_shape_[1], in_shape_[2], in_shape_[3]);
    const std::size_t plane = gx.plane();
    for (int i = 0; i < gx.n(); ++i)
        for (int c = 0; c < gx.c(); ++c) {
            const T v = static_cast<T>(g(i, c, 0, 0) / static_cast<double>(plane));
            std::fill_n(gx.channel(i, c), plane, v);
        }
    return gx;
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(int in_features, int out_features)
    : in_(in_features), out_(out_features), weight_(out_features, in_features, 1, 1),
      bias_(1, out_features, 1, 1) {
    if (in_features <= 0 || out_features <= 0) throw ParameterError("Linear: sizes must be positive");
}

template <typename T>
void Linear<T>::init_default(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : weight_.value.values()) v = static_cast<T>(dist(rng));
    bias_.value.zero();
}

template <typename T>
void Linear<T>::zero() {
    weight_.value.zero();
    bias_.value.zero();
}

template <typename T>
void Linear<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    reg.add_parameter(prefix + ".weight", weight_);
    reg.add_parameter(prefix + ".bias", bias_);
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) {
    if (static_cast<std::size_t>(in_) != x.sample_stride())
        throw ShapeError("Linear: expected " + std::to_string(in_) + " features");
    ConstMatMap<T> xm(x.data(), x.n(), in_);
    ConstMatMap<T> wm(weight_.value.data(), out_, in_);
    Tensor<T> y(x.n(), out_, 1, 1);
    MatMap<T> ym(y.data(), x.n(), out_);
    ym.noalias() = xm * wm.transpose();
    for (int i = 0; i < x.n(); ++i)
        for (int o = 0; o < out_; ++o) ym(i, o) += bias_.value[static_cast<std::size_t>(o)];
    if (this->training_)
        cached_ = x;
    else
        cached_ = Tensor<T>();
    return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& g) {
    this->require_cache(!cached_.empty(), "Linear");
    const int n = cached_.n();
    ConstMatMap<T> gm(g.data(), n, out_);
    ConstMatMap<T> xm(cached_.data(), n, in_);
    ConstMatMap<T> wm(weight_.value.data(), out_, in_);
    MatMap<T> gw(weight_.grad.data(), out_, in_);
    gw.noalias() += gm.transpose() * xm;
    for (int i = 0; i < n; ++i)
        for (int o = 0; o < out_; ++o) bias_.grad[static_cast<std::size_t>(o)] += gm(i, o);
    Tensor<T> gx(cached_.n(), cached_.c(), cached_.h(), cached_.w());
    MatMap<T> gxm(gx.data(), n, in_);
    gxm.noalias() = gm * wm;
    return gx;
}

// ------------------------------------------------------------ Sequential

template <typename T>
Layer<T>& Sequential<T>::add(LayerPtr<T> layer) {
    layer->set_training(this->training_);
    layers_.push_back(std::move(layer));
    return *layers_.back();
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x) {
    if (layers_.empty()) return x;
    Tensor<T> h = layers_.front()->forward(x);
    for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward_owned(std::move(h));
    return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& g) {
    if (layers_.empty()) return g;
    Tensor<T> h = layers_.back()->backward(g);
    for (std::size_t i = layers_.size() - 1; i-- > 0;) h = layers_[i]->backward(h);
    return h;
}

template <typename T>
void Sequential<T>::register_state(const std::string& prefix, StateRegistry<T>& reg) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->register_state(prefix + "." + std::to_string(i), reg);
}

template <typename T>
void Sequential<T>::set_training(bool on) {
    this->training_ = on;
    for (auto& l : layers_) l->set_training(on);
}

template <typename T>
int Sequential<T>::conv_count() const {
    int n = 0;
    for (const auto& l : layers_) n += l->conv_count();
    return n;
}

#define MTCD_INSTANTIATE_LAYERS(T)  \
    template class Layer<T>;        \
    template class Conv2d<T>;       \
    template class Deconv2x2<T>;    \
    template class BatchNorm2d<T>;  \
    template class ReLU<T>;         \
    template class AvgPool2x2<T>;   \
    template class GlobalAvgPool<T>; \
    template class Linear<T>;       \
    template class Sequential<T>;

MTCD_INSTANTIATE_LAYERS(float)
MTCD_INSTANTIATE_LAYERS(double)

} // namespace mtcd::nn
