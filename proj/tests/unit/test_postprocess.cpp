#include <doctest.h>

#include <random>

#include "mtcd/postprocess.hpp"
#include "oracles.hpp"

using namespace mtcd;

namespace {

bool subset(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.pixels()[k] && !b.pixels()[k]) return false;
    return true;
}

} // namespace

TEST_CASE("square dilation and erosion match the sliding window") {
    std::mt19937_64 rng(5);
    for (int r = 1; r <= 3; ++r)
        for (int t = 0; t < 10; ++t) {
            const auto m = oracle::random_mask(13, 19, 0.3 + 0.04 * t, rng);
            const StructuringElement se{StructuringElement::Shape::square, r};
            CHECK(dilate(m, se) == oracle::window_dilate(m, r));
            CHECK(erode(m, se) == oracle::window_erode(m, r));
        }
}

TEST_CASE("disk element") {
    const StructuringElement se{StructuringElement::Shape::disk, 2};
    CHECK(se.offsets().size() == 13);
    BinaryMask dot(7, 7);
    dot(3, 3) = 1;
    const auto d = dilate(dot, se);
    CHECK(count_ones(d) == 13);
    CHECK(d(1, 3) == 1);
    CHECK(d(1, 2) == 0);
    CHECK(erode(d, se) == dot);
}

TEST_CASE("closing fills a hole smaller than the element") {
    BinaryMask m(12, 12, 1);
    m(5, 5) = 0;
    m(5, 6) = 0;
    CHECK(close(m) == BinaryMask(12, 12, 1));
}

TEST_CASE("closing is extensive, idempotent and monotone with either shape") {
    std::mt19937_64 rng(9);
    for (auto shape : {StructuringElement::Shape::square, StructuringElement::Shape::disk}) {
        const StructuringElement se{shape, 2};
        for (int t = 0; t < 20; ++t) {
            const auto a = oracle::random_mask(20, 20, 0.5, rng);
            auto b = a;
            const auto extra = oracle::random_mask(20, 20, 0.2, rng);
            for (std::size_t k = 0; k < b.size(); ++k) b.pixels()[k] |= extra.pixels()[k];
            const auto ca = close(a, se);
            CHECK(subset(a, ca));
            CHECK(close(ca, se) == ca);
            CHECK(subset(ca, close(b, se)));
        }
    }
}

TEST_CASE("morphology validates") {
    CHECK_THROWS_AS(close(BinaryMask(3, 3), {StructuringElement::Shape::square, 0}), ParameterError);
    CHECK_THROWS_AS(close(BinaryMask(3, 3, 2)), ValidationError);
}

TEST_CASE("roi crops the grown bounding box of the masked image") {
    RealImage img(100, 80, 0.5f);
    BinaryMask m(100, 80);
    for (int y = 40; y < 60; ++y)
        for (int x = 30; x < 50; ++x) m(y, x) = 1;
    const auto r = extract_roi(img, m, 32);
    CHECK_FALSE(r.empty_mask);
    CHECK(r.crop.y0 == 38);
    CHECK(r.crop.x0 == 28);
    CHECK(r.crop.y1 == 62);
    CHECK(r.crop.x1 == 52);
    CHECK(r.roi.height() == 32);
    CHECK(r.masked(0, 0) == 0.0f);
    CHECK(r.masked(50, 40) == 0.5f);
    // Centre of the ROI lies inside the mask, corners in the margin.
    CHECK(r.roi(16, 16) == doctest::Approx(0.5));
    CHECK(r.roi(0, 0) == 0.0f);
}

TEST_CASE("roi margin is clamped at the image border") {
    RealImage img(50, 50, 1.0f);
    BinaryMask m(50, 50);
    for (int y = 0; y < 10; ++y)
        for (int x = 40; x < 50; ++x) m(y, x) = 1;
    const auto r = extract_roi(img, m, 16);
    CHECK(r.crop.y0 == 0);
    CHECK(r.crop.x1 == 50);
}

TEST_CASE("empty mask falls back to a centre crop") {
    RealImage img(60, 100, 0.2f);
    const auto r = extract_roi(img, BinaryMask(60, 100), 24);
    CHECK(r.empty_mask);
    CHECK(r.crop.width() == 60);
    CHECK(r.crop.x0 == 20);
    CHECK(r.roi.height() == 24);
    CHECK_THROWS_AS(extract_roi(img, BinaryMask(60, 99)), ShapeError);
}
