#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mtcd/error.hpp"
#include "mtcd/nn/buffer_pool.hpp"

namespace mtcd::nn {

/// Dense 4-D array in NCHW order. Vectors and matrices use the leading
/// dimensions with trailing extents of 1.
template <typename T>
class Tensor {
public:
    using value_type = T;

    using Storage = std::vector<T, PooledAllocator<T>>;

    Tensor() = default;
    Tensor(int n, int c, int h, int w, T fill = T{}) : Tensor(n, c, h, w, nullptr) {
        std::fill(data_.begin(), data_.end(), fill);
    }

    /// Tensor whose contents are unspecified until written.
    static Tensor uninitialized(int n, int c, int h, int w) { return Tensor(n, c, h, w, nullptr); }

    int n() const noexcept { return shape_[0]; }
    int c() const noexcept { return shape_[1]; }
    int h() const noexcept { return shape_[2]; }
    int w() const noexcept { return shape_[3]; }
    const std::array<int, 4>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t plane() const noexcept { return static_cast<std::size_t>(h()) * w(); }
    std::size_t sample_stride() const noexcept { return plane() * c(); }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    Storage& values() noexcept { return data_; }
    const Storage& values() const noexcept { return data_; }

    T* sample(int i) noexcept { return data_.data() + sample_stride() * static_cast<std::size_t>(i); }
    const T* sample(int i) const noexcept {
        return data_.data() + sample_stride() * static_cast<std::size_t>(i);
    }
    T* channel(int i, int ch) noexcept { return sample(i) + plane() * static_cast<std::size_t>(ch); }
    const T* channel(int i, int ch) const noexcept {
        return sample(i) + plane() * static_cast<std::size_t>(ch);
    }

    T& operator()(int i, int ch, int y, int x) noexcept { return channel(i, ch)[offset(y, x)]; }
    const T& operator()(int i, int ch, int y, int x) const noexcept {
        return channel(i, ch)[offset(y, x)];
    }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(T{}); }

    bool same_shape(const Tensor& o) const noexcept { return shape_ == o.shape_; }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Tensor(int n, int c, int h, int w, std::nullptr_t) : shape_{n, c, h, w} {
        if (n < 0 || c < 0 || h < 0 || w < 0) throw ShapeError("negative tensor extent");
        data_.resize(static_cast<std::size_t>(n) * c * h * w);
    }

    std::size_t offset(int y, int x) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(w()) + static_cast<std::size_t>(x);
    }

    std::array<int, 4> shape_{0, 0, 0, 0};
    Storage data_;
};

std::string shape_string(const std::array<int, 4>& s);

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
}

/// Channel concatenation of two tensors with equal N, H, W.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Splits a gradient produced by concat_channels back into its two parts.
template <typename T>
void split_channels(const Tensor<T>& g, int first_channels, Tensor<T>& ga, Tensor<T>& gb);

/// Copies channels [begin, begin + count) of every sample.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int begin, int count);

/// Adds `src` into channels [begin, begin + src.c()) of `dst`.
template <typename T>
void add_into_channels(Tensor<T>& dst, const Tensor<T>& src, int begin);

template <typename T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src);

/// Element-wise conversion between scalar types.
template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& x) {
    Tensor<To> out(x.n(), x.c(), x.h(), x.w());
    std::transform(x.values().begin(), x.values().end(), out.values().begin(),
                   [](From v) { return static_cast<To>(v); });
    return out;
}

} // namespace mtcd::nn
