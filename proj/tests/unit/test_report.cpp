#include <doctest.h>

#include <random>

#include "mtcd/report/embedding.hpp"
#include "mtcd/report/plot.hpp"
#include "mtcd/report/report.hpp"
#include "scratch.hpp"

using namespace mtcd;
using namespace mtcd::report;

TEST_CASE("silhouette on a worked example") {
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {10, 0}};
    const double expect = ((1 - 1.0 / 10) + (1 - 1.0 / 9) + 0.0) / 3;
    CHECK(silhouette(pts, {0, 0, 1}) == doctest::Approx(expect));
    CHECK_THROWS_AS(silhouette(pts, {0, 0, 0}), ValidationError);
    CHECK_THROWS_AS(silhouette(pts, {0, 1}), ShapeError);
}

TEST_CASE("t-SNE keeps well separated clusters apart and is seeded") {
    std::mt19937_64 rng(1);
    std::normal_distribution<float> d(0, 0.3f);
    std::vector<std::vector<float>> x;
    std::vector<int> labels;
    for (int k = 0; k < 40; ++k) {
        const float c = k < 20 ? 0.0f : 5.0f;
        x.push_back({c + d(rng), c + d(rng), d(rng), c + d(rng)});
        labels.push_back(k < 20 ? 0 : 1);
    }
    TsneOptions o;
    o.seed = 3;
    const auto y = tsne(x, o);
    REQUIRE(y.size() == 40);
    CHECK(silhouette(y, labels) > 0.5);
    CHECK(tsne(x, o) == y);
    CHECK_THROWS_AS(tsne({{1.0f}, {2.0f}}), ValidationError);
}

TEST_CASE("plots have the requested size and are not blank") {
    const auto bar = bar_chart("t", {"a", "b"}, {{"g1", {0.5, 0.25}}, {"g2", {1.0, 0.0}}}, 1.0);
    CHECK(bar.width > 0);
    CHECK(bar.height > 0);
    CHECK_THROWS_AS(bar_chart("t", {"a"}, {}, 1.0), ValidationError);
    const auto sc = scatter_plot("s", {{0, 0}, {1, 1}}, {0, 1}, {"x", "y"});
    CHECK(sc.rgb.size() == static_cast<std::size_t>(sc.width) * sc.height * 3);
}

TEST_CASE("run summaries and the written report") {
    testing_util::ScratchDir dir("report");
    const nlohmann::json seg_hist = {{"task", "segmentation"},
                                     {"epochs", nlohmann::json::array({{{"epoch", 1}, {"train_loss", 0.5},
                                                                         {"test_seg_error", 0.1}}})},
                                     {"best_epoch", 1},
                                     {"best_test_seg_error", 0.1}};
    const auto s = summarize_run(seg_hist, "seg");
    CHECK(s.task == "segmentation");
    CHECK(*s.seg_error == 0.1);
    const nlohmann::json eval = {{"kind", "seg_eval"}, {"error", 0.02}};
    CHECK(*summarize_run(eval, "e").seg_error == 0.02);
    CHECK_THROWS_AS(summarize_run(nlohmann::json::array(), "x"), ValidationError);
    CHECK_THROWS_AS(summarize_run({{"kind", "unknown"}}, "x"), ValidationError);

    const auto files = write_report({s}, dir / "out");
    CHECK(std::filesystem::exists(dir / "out" / "summary.md"));
    CHECK(std::filesystem::exists(dir / "out" / "seg_error.png"));
    CHECK_FALSE(files.written.empty());
    CHECK_THROWS_AS(write_report({}, dir / "none"), ValidationError);
    CHECK_FALSE(std::filesystem::exists(dir / "none"));
}
