#include <doctest.h>

#include <random>

#include "mtcd/metrics.hpp"
#include "oracles.hpp"

using namespace mtcd;

TEST_CASE("seg error matches the XOR double loop") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<BinaryMask> gt, pred;
        const int n = 1 + trial % 4;
        for (int k = 0; k < n; ++k) {
            gt.push_back(oracle::random_mask(9, 14, 0.4, rng));
            pred.push_back(oracle::random_mask(9, 14, 0.6, rng));
        }
        const auto r = seg_error(gt, pred);
        const auto o = oracle::xor_error(gt, pred);
        CHECK(r.disagreeing_pixels == o.disagree);
        CHECK(r.error == o.error());
        CHECK(r.per_sample_errors.size() == gt.size());
    }
}

TEST_CASE("seg error edge cases") {
    BinaryMask a(4, 4), b(4, 4, 1);
    CHECK(seg_error({a}, {a}).error == 0.0);
    CHECK(seg_error({a}, {b}).error == 1.0);
    CHECK(seg_error({a, a}, {a, b}).error == 0.5);
    CHECK_THROWS_AS(seg_error({}, {}), ValidationError);
    CHECK_THROWS_AS(seg_error({a}, {BinaryMask(4, 5)}), ValidationError);
    CHECK_THROWS_AS(seg_error({a}, {a, a}), ValidationError);
    BinaryMask bad(4, 4, 3);
    CHECK_THROWS_AS(seg_error({a}, {bad}), ValidationError);
}

TEST_CASE("classification metrics on a worked example") {
    // actual:    0 0 0 1 1 2
    // predicted: 0 0 1 1 0 2
    const auto r = classification_eval({0, 0, 1, 1, 0, 2}, {0, 0, 0, 1, 1, 2}, {"a", "b", "c"});
    CHECK(r.total == 6);
    CHECK(r.accuracy == doctest::Approx(4.0 / 6));
    CHECK(r.confusion == std::vector<std::vector<std::size_t>>{{2, 1, 0}, {1, 1, 0}, {0, 0, 1}});
    CHECK(*r.precision[0] == doctest::Approx(2.0 / 3));
    CHECK(*r.recall[0] == doctest::Approx(2.0 / 3));
    CHECK(*r.precision[1] == doctest::Approx(0.5));
    CHECK(*r.recall[1] == doctest::Approx(0.5));
    CHECK(*r.f1[2] == 1.0);
    CHECK(*r.macro_precision == doctest::Approx((2.0 / 3 + 0.5 + 1.0) / 3));
    CHECK(*r.confusion_normalized[1][0] == doctest::Approx(0.5));
}

TEST_CASE("undefined ratios stay empty and are left out of macro averages") {
    // Class 2 never occurs and is never predicted.
    const auto r = classification_eval({0, 1, 1}, {0, 1, 0}, {"a", "b", "c"});
    CHECK_FALSE(r.precision[2].has_value());
    CHECK_FALSE(r.recall[2].has_value());
    CHECK_FALSE(r.f1[2].has_value());
    CHECK_FALSE(r.confusion_normalized[2][0].has_value());
    CHECK(*r.macro_recall == doctest::Approx((0.5 + 1.0) / 2));
    // Predicted never but present: precision undefined, recall 0, F1 0.
    const auto s = classification_eval({0, 0}, {0, 1}, {"a", "b"});
    CHECK_FALSE(s.precision[1].has_value());
    CHECK(*s.recall[1] == 0.0);
    CHECK(*s.f1[1] == 0.0);
}

TEST_CASE("classification metrics validate input") {
    CHECK_THROWS_AS(classification_eval({0}, {0, 1}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(classification_eval({2}, {0}, {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(classification_eval({}, {}, {"a", "b"}), ValidationError);
}

TEST_CASE("multitask eval names and json") {
    const auto e = cls_eval({1, 0}, {1, 0}, {0, 2}, {0, 1});
    CHECK(e.t1.class_names == std::vector<std::string>{"healthy", "unhealthy"});
    CHECK(e.t2.class_names.size() == 3);
    CHECK(e.t1.accuracy == 1.0);
    CHECK(e.t2.accuracy == 0.5);
    const nlohmann::json j = e;
    CHECK(j["t2"]["precision"][1].is_null());
    CHECK(j["t1"]["accuracy"].get<double>() == 1.0);
}
