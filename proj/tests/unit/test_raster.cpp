#include <doctest.h>

#include <random>

#include "mtcd/image_io.hpp"
#include "mtcd/raster.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace mtcd;

TEST_CASE("grid rejects negative sizes") { CHECK_THROWS_AS(GrayImage(-1, 3), ShapeError); }

TEST_CASE("flip reverses columns") {
    GrayImage g(3, 5);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x) g(y, x) = static_cast<std::uint8_t>(10 * y + x);
    const auto f = flip_horizontal(g);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x) CHECK(f(y, x) == g(y, 4 - x));
    CHECK(flip_horizontal(f) == g);
}

TEST_CASE("nearest resize by an integer factor replicates pixels") {
    std::mt19937_64 rng(3);
    const auto m = oracle::random_mask(6, 7, 0.5, rng);
    const auto up = resize_nearest(m, 12, 14);
    std::vector<std::uint8_t> plane(m.pixels().begin(), m.pixels().end());
    const auto expect = oracle::upsample_nearest(plane, 6, 7);
    CHECK(std::vector<std::uint8_t>(up.pixels().begin(), up.pixels().end()) == expect);
    CHECK(resize_nearest(up, 6, 7) == m);
}

TEST_CASE("bilinear resize keeps constant images constant and identity sizes exact") {
    RealImage c(9, 13, 0.25f);
    const auto r = resize_bilinear(c, 20, 7);
    for (float v : r.pixels()) CHECK(v == doctest::Approx(0.25));
    GrayImage g(5, 5);
    for (std::size_t i = 0; i < g.size(); ++i) g.pixels()[i] = static_cast<std::uint8_t>(i * 9);
    CHECK(resize_bilinear(g, 5, 5) == g);
}

TEST_CASE("unit range maps 0 and 255 to the ends") {
    GrayImage g(1, 2);
    g(0, 0) = 0;
    g(0, 1) = 255;
    const auto r = to_unit_range(g);
    CHECK(r(0, 0) == 0.0f);
    CHECK(r(0, 1) == 1.0f);
}

TEST_CASE("png round trips for images and masks") {
    testing_util::ScratchDir dir("png");
    GrayImage g(17, 23);
    for (std::size_t i = 0; i < g.size(); ++i) g.pixels()[i] = static_cast<std::uint8_t>((i * 37) % 256);
    write_png(dir / "g.png", g);
    CHECK(read_png(dir / "g.png") == g);

    std::mt19937_64 rng(1);
    const auto m = oracle::random_mask(11, 9, 0.3, rng);
    write_mask_png(dir / "m.png", m);
    CHECK(read_mask_png(dir / "m.png") == m);
    CHECK_THROWS_AS(read_png(dir / "missing.png"), LoadError);
}

TEST_CASE("binary checks") {
    BinaryMask m(2, 2);
    CHECK(is_binary(m));
    m(1, 1) = 2;
    CHECK_FALSE(is_binary(m));
    CHECK_THROWS_AS(require_binary(m, "mask"), ValidationError);
    m(1, 1) = 1;
    CHECK(count_ones(m) == 1);
    CHECK(count_ones(invert(m)) == 3);
}
