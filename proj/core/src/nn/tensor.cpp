#include "mtcd/nn/tensor.hpp"

#include <algorithm>

namespace mtcd::nn {

std::string shape_string(const std::array<int, 4>& s) {
    return "[" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) +
           "," + std::to_string(s[3]) + "]";
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
        throw ShapeError("concat_channels: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    auto out = Tensor<T>::uninitialized(a.n(), a.c() + b.c(), a.h(), a.w());
    for (int i = 0; i < a.n(); ++i) {
        std::copy_n(a.sample(i), a.sample_stride(), out.sample(i));
        std::copy_n(b.sample(i), b.sample_stride(), out.sample(i) + a.sample_stride());
    }
    return out;
}

template <typename T>
void split_channels(const Tensor<T>& g, int first_channels, Tensor<T>& ga, Tensor<T>& gb) {
    ga = slice_channels(g, 0, first_channels);
    gb = slice_channels(g, first_channels, g.c() - first_channels);
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int begin, int count) {
    if (begin < 0 || count < 0 || begin + count > x.c())
        throw ShapeError("slice_channels out of range");
    auto out = Tensor<T>::uninitialized(x.n(), count, x.h(), x.w());
    for (int i = 0; i < x.n(); ++i)
        std::copy_n(x.channel(i, begin), out.sample_stride(), out.sample(i));
    return out;
}

template <typename T>
void add_into_channels(Tensor<T>& dst, const Tensor<T>& src, int begin) {
    if (dst.n() != src.n() || dst.h() != src.h() || dst.w() != src.w() ||
        begin + src.c() > dst.c())
        throw ShapeError("add_into_channels: incompatible shapes");
    for (int i = 0; i < src.n(); ++i) {
        T* d = dst.channel(i, begin);
        const T* s = src.sample(i);
        for (std::size_t k = 0; k < src.sample_stride(); ++k) d[k] += s[k];
    }
}

template <typename T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
    require_same_shape(dst, src, "add_inplace");
    T* d = dst.data();
    const T* s = src.data();
    for (std::size_t k = 0; k < dst.size(); ++k) d[k] += s[k];
}

#define MTCD_INSTANTIATE(T)                                                              \
    template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);             \
    template void split_channels(const Tensor<T>&, int, Tensor<T>&, Tensor<T>&);        \
    template Tensor<T> slice_channels(const Tensor<T>&, int, int);                      \
    template void add_into_channels(Tensor<T>&, const Tensor<T>&, int);                 \
    template void add_inplace(Tensor<T>&, const Tensor<T>&);

MTCD_INSTANTIATE(float)
MTCD_INSTANTIATE(double)

} // namespace mtcd::nn
