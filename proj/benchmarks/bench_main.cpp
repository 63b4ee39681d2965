#include <random>

#include <benchmark/benchmark.h>

#include "mtcd/cls/multitask_net.hpp"
#include "mtcd/metrics.hpp"
#include "mtcd/postprocess.hpp"
#include "mtcd/seg/pyramid_net.hpp"

using namespace mtcd;

namespace {

template <typename T>
nn::Tensor<T> noise(int n, int c, int h, int w) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    nn::Tensor<T> t(n, c, h, w);
    for (auto& v : t.values()) v = static_cast<T>(u(rng));
    return t;
}

BinaryMask random_mask(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BinaryMask m(h, w);
    for (auto& v : m.pixels()) v = static_cast<std::uint8_t>(rng() & 1);
    return m;
}

void BM_Conv3x3Forward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0)), hw = static_cast<int>(state.range(1));
    nn::Rng rng(0);
    nn::Conv2d<float> conv(c, c, 3, false);
    conv.init_normal(rng);
    conv.set_training(false);
    const auto x = noise<float>(1, c, hw, hw);
    for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
    state.SetItemsProcessed(state.iterations() * 9LL * c * c * hw * hw);
}
BENCHMARK(BM_Conv3x3Forward)->Args({16, 112})->Args({64, 56})->Args({128, 28})->Unit(benchmark::kMillisecond);

void BM_SegmentationForward(benchmark::State& state) {
    seg::PyramidNet<float> net(seg::PyramidConfig{}, 0);
    net.set_training(false);
    const auto x = noise<float>(1, 1, 224, 224);
    for (auto _ : state) benchmark::DoNotOptimize(net.predict_mask(x));
}
BENCHMARK(BM_SegmentationForward)->Unit(benchmark::kMillisecond);

void BM_SegmentationTrainStep(benchmark::State& state) {
    seg::PyramidNet<float> net(seg::PyramidConfig{}, 0);
    const auto x = noise<float>(4, 1, 224, 224);
    std::vector<BinaryMask> gt;
    for (int i = 0; i < 4; ++i) gt.push_back(random_mask(224, 224, static_cast<std::uint64_t>(i)));
    for (auto _ : state) {
        net.state().zero_grad();
        const auto out = net.forward_pyramid(x);
        net.backward(seg::seg_loss_from_logits(out.logits, gt).grad);
    }
}
BENCHMARK(BM_SegmentationTrainStep)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_ClassifierForward(benchmark::State& state) {
    cls::MultitaskNet<float> net(cls::ClassifierConfig{}, 0);
    net.set_training(false);
    const auto x = noise<float>(1, 1, 224, 224);
    for (auto _ : state) benchmark::DoNotOptimize(net.cls_forward(x));
}
BENCHMARK(BM_ClassifierForward)->Unit(benchmark::kMillisecond);

void BM_SegError(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::vector<BinaryMask> gt, pred;
    for (int i = 0; i < n; ++i) {
        gt.push_back(random_mask(224, 224, static_cast<std::uint64_t>(i)));
        pred.push_back(random_mask(224, 224, static_cast<std::uint64_t>(1000 + i)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(seg_error(gt, pred));
    state.SetItemsProcessed(state.iterations() * n * 224LL * 224);
}
BENCHMARK(BM_SegError)->Arg(1)->Arg(30);

void BM_Close(benchmark::State& state) {
    const auto m = random_mask(224, 224, 3);
    const StructuringElement se{state.range(0) ? StructuringElement::Shape::disk : StructuringElement::Shape::square,
                                2};
    for (auto _ : state) benchmark::DoNotOptimize(close(m, se));
}
BENCHMARK(BM_Close)->Arg(0)->Arg(1);

void BM_ExtractRoi(benchmark::State& state) {
    RealImage img(224, 224, 0.5f);
    BinaryMask m(224, 224);
    for (int y = 60; y < 160; ++y)
        for (int x = 50; x < 170; ++x) m(y, x) = 1;
    for (auto _ : state) benchmark::DoNotOptimize(extract_roi(img, m));
}
BENCHMARK(BM_ExtractRoi);

} // namespace
BENCHMARK_MAIN();
