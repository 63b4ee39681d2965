#include <doctest.h>

#include "fixtures.hpp"
#include "mtcd/seg/pyramid_net.hpp"
#include "oracles.hpp"

using namespace mtcd;
using namespace mtcd::seg;

TEST_CASE("default configuration") {
    PyramidConfig c;
    CHECK_NOTHROW(c.validate());
    PyramidNet<float> net(c, 1);
    CHECK(net.backbone_conv_count() == 43);
    CHECK(c.backbone_conv_count() == 43);
    CHECK(net.parameter_count() >= 500000);
    CHECK(net.parameter_count() <= 2000000);
}

TEST_CASE("config validation") {
    auto c = fixtures::tiny_pyramid(3, 16);
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.structural_levels = 1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.structural_levels = 4;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.input_height = 18;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.layers_per_block = {1, 1};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.compression = 0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    CHECK_THROWS_AS(PyramidNet<float>(bad, 0), ParameterError);
}

TEST_CASE("config json round trip") {
    auto c = fixtures::tiny_pyramid(4, 32, 3);
    const nlohmann::json j = c;
    const auto back = j.get<PyramidConfig>();
    CHECK(nlohmann::json(back) == j);
}

TEST_CASE("pyramid levels shrink by one map per level") {
    for (int n : {3, 4}) {
        PyramidNet<double> net(fixtures::tiny_pyramid(n, 32), 2);
        const auto out = net.forward_pyramid(fixtures::random_images<double>(2, 32, 32, 3));
        REQUIRE(static_cast<int>(out.levels.size()) == n);
        for (int j = 1; j <= n; ++j) {
            const auto& lv = out.levels[static_cast<std::size_t>(j - 1)];
            CHECK(lv.level == j);
            CHECK(static_cast<int>(lv.maps.size()) == n - (j - 1));
            for (int i = 1; i <= n - (j - 1); ++i) {
                const auto& m = lv.maps[static_cast<std::size_t>(i - 1)];
                CHECK(m.c() == 2);
                CHECK(m.h() == 32 >> (i - 1));
            }
        }
        CHECK(out.logits.h() == 32);
        CHECK(out.logits.c() == 2);
    }
}

TEST_CASE("truncated pyramid is upsampled back to the input size") {
    PyramidNet<float> net(fixtures::tiny_pyramid(4, 32, 2), 2);
    CHECK(net.upsampler_count() == 2);
    const auto out = net.forward_pyramid(fixtures::random_images<float>(1, 32, 32, 3));
    CHECK(out.levels.size() == 2);
    CHECK(out.logits.h() == 32);
    CHECK(out.logits.w() == 32);
    CHECK_THROWS_AS(net.forward_pyramid(fixtures::random_images<float>(1, 16, 32, 3)), ShapeError);
}

TEST_CASE("fusion with hand-set weights passes either input through") {
    nn::Rng rng(0);
    Fusion<double> f(rng);
    const auto fine = fixtures::random_images<double>(2, 8, 8, 1);
    nn::Tensor<double> fine2(2, 2, 8, 8), coarse(2, 2, 4, 4);
    std::mt19937_64 g(7);
    std::normal_distribution<double> d;
    for (auto& v : fine2.values()) v = d(g);
    for (auto& v : coarse.values()) v = d(g);

    auto& s = f.smooth();
    s.weight().value.zero();
    s.bias().value.zero();
    for (int c = 0; c < 4; ++c) s.weight().value(c, c, 1, 1) = 1.0;
    auto& r = f.reduce();
    r.bias().value.zero();
    auto select = [&](int first) {
        r.weight().value.zero();
        r.weight().value(0, first, 0, 0) = 1.0;
        r.weight().value(1, first + 1, 0, 0) = 1.0;
    };

    select(0);
    const auto out = f.forward(fine2, coarse);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == fine2[i]);

    select(2);
    const auto up = f.forward(fine2, coarse);
    for (int n = 0; n < 2; ++n)
        for (int c = 0; c < 2; ++c) {
            const std::vector<double> plane(coarse.channel(n, c), coarse.channel(n, c) + 16);
            const auto expect = oracle::upsample_nearest(plane, 4, 4);
            for (int i = 0; i < 64; ++i) CHECK(up.channel(n, c)[i] == expect[static_cast<std::size_t>(i)]);
        }
    CHECK_THROWS_AS(f.forward(fine2, fine2), ShapeError);
}

TEST_CASE("segmentation loss gradient, tiny pyramid") {
    for (int levels : {3, 2}) {
        PyramidNet<double> net(fixtures::tiny_pyramid(3, 8, levels), 5);
        const auto x = fixtures::random_images<double>(2, 8, 8, 6);
        const auto gt = fixtures::random_disks(2, 8, 8, 7);
        net.state().zero_grad();
        const auto out = net.forward_pyramid(x);
        net.backward(seg_loss_from_logits(out.logits, gt).grad);
        const auto r = oracle::check_gradients(net.state(), [&] {
            return seg_loss_from_logits(net.forward_pyramid(x).logits, gt).loss;
        }, 1e-5);
        CHECK_MESSAGE(r.max_rel < 1e-4, r.worst << " " << r.max_rel);
    }
}

TEST_CASE("mask prediction") {
    PyramidNet<float> net(fixtures::tiny_pyramid(3, 16), 1);
    net.set_training(false);
    const auto preds = net.predict_mask(fixtures::random_images<float>(3, 16, 16, 2));
    REQUIRE(preds.size() == 3);
    for (const auto& p : preds) {
        CHECK(p.mask.height() == 16);
        CHECK(is_binary(p.mask));
        for (std::size_t k = 0; k < p.mask.size(); ++k) {
            CHECK(p.foreground.pixels()[k] + p.background.pixels()[k] == doctest::Approx(1.0));
            CHECK(p.mask.pixels()[k] == (p.foreground.pixels()[k] >= p.background.pixels()[k] ? 1 : 0));
        }
    }
}

TEST_CASE("ties go to the foreground and seg loss is the mean pixel cross-entropy") {
    nn::Tensor<double> logits(1, 2, 1, 2);
    logits(0, 0, 0, 1) = -1.0;
    const auto p = masks_from_logits(logits);
    CHECK(p[0].mask(0, 0) == 1);
    CHECK(p[0].mask(0, 1) == 0);
    BinaryMask gt(1, 2);
    gt(0, 0) = 1;
    const double p_bg = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(seg_loss(p[0], gt) == doctest::Approx((std::log(2.0) - std::log(p_bg)) / 2));
    CHECK(seg_loss_from_logits(logits, {gt}).loss == doctest::Approx(seg_loss(p[0], gt)));
}
