#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "mtcd/data/manifest.hpp"
#include "mtcd/harness/checkpoint.hpp"
#include "mtcd/harness/pipeline.hpp"
#include "mtcd/harness/training.hpp"
#include "mtcd/image_io.hpp"
#include "mtcd/nn/serialize.hpp"
#include "scratch.hpp"

using namespace mtcd;
using namespace mtcd::harness;

namespace {

data::Dataset small_corpus(int n_per_class, std::uint64_t seed) {
    data::CorpusOptions o;
    o.n_per_class = n_per_class;
    o.canvas_height = 48;
    o.canvas_width = 64;
    o.seed = seed;
    o.test_fraction = 0.25;
    return data::synthesize_dataset(o);
}

TrainConfig quick(Task task, int epochs) {
    TrainConfig c = TrainConfig::defaults(task);
    c.epochs = epochs;
    c.lr = 1e-3;
    c.augment.reset();
    c.seed = 21;
    return c;
}

template <typename T>
bool same_values(const nn::Tensor<T>& a, const nn::Tensor<T>& b) {
    return a.shape() == b.shape() && a.values() == b.values();
}

} // namespace

TEST_CASE("training defaults follow the task") {
    const auto s = TrainConfig::defaults(Task::segmentation);
    CHECK(s.epochs == 60);
    CHECK(s.lr == 1e-3);
    CHECK(s.augment->multiplier == 10);
    const auto c = TrainConfig::defaults(Task::classification);
    CHECK(c.epochs == 100);
    CHECK(c.lr == 1e-5);
    CHECK(c.batch_size == 4);
    CHECK(c.lambda == 0.5);
    CHECK(c.augment->multiplier == 5);
}

TEST_CASE("train config json round trip and validation") {
    testing_util::ScratchDir dir("trainconfig");
    auto c = TrainConfig::defaults(Task::classification);
    c.seed = 99;
    const nlohmann::json j = c;
    CHECK(j.contains("optimizer"));
    std::ofstream(dir / "c.json") << j.dump();
    const auto back = read_train_config(dir / "c.json");
    CHECK(nlohmann::json(back) == j);
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = TrainConfig::defaults(Task::segmentation);
    c.lr = -1;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    std::ofstream(dir / "bad.json") << "[1, 2";
    CHECK_THROWS_AS(read_train_config(dir / "bad.json"), LoadError);
}

TEST_CASE("segmentation training is reproducible and checkpoints round trip") {
    testing_util::ScratchDir dir("segckpt");
    const auto d = small_corpus(4, 1);
    const auto cfg = fixtures::tiny_pyramid(3, 16);
    const auto tc = quick(Task::segmentation, 2);
    auto a = train_segmentation(d, cfg, tc);
    auto b = train_segmentation(d, cfg, tc);
    REQUIRE(a.history.epochs.size() == 2);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(a.history.epochs[e].train_loss == b.history.epochs[e].train_loss);
        CHECK(a.history.epochs[e].test_error == b.history.epochs[e].test_error);
    }
    CHECK(a.history.rng_state_digest == b.history.rng_state_digest);
    CHECK(nn::weights_digest(a.model->state()) == nn::weights_digest(b.model->state()));

    save_checkpoint(dir / "seg.json", *a.model, {{"epoch", a.history.best_epoch}});
    nlohmann::json side;
    auto loaded = load_segmentation<float>(dir / "seg.json", &side);
    CHECK(side["epoch"] == a.history.best_epoch);
    CHECK(side["kind"] == "segmentation");
    const auto x = fixtures::random_images<float>(2, 16, 16, 4);
    CHECK(same_values(a.model->forward_pyramid(x).logits, loaded->forward_pyramid(x).logits));

    CHECK_THROWS_AS(load_classifier<float>(dir / "seg.json"), LoadError);
    CHECK_THROWS_AS(load_segmentation<float>(dir / "none.json"), LoadError);
    std::filesystem::remove(weights_path_for(dir / "seg.json"));
    CHECK_THROWS_AS(load_segmentation<float>(dir / "seg.json"), LoadError);
}

TEST_CASE("the best test epoch is kept") {
    const auto d = small_corpus(3, 2);
    auto r = train_segmentation(d, fixtures::tiny_pyramid(3, 16), quick(Task::segmentation, 3));
    double best = 2;
    int at = 0;
    for (const auto& e : r.history.epochs)
        if (*e.test_error < best) {
            best = *e.test_error;
            at = e.epoch;
        }
    CHECK(r.history.best_epoch == at);
    std::vector<SegExample> test = prepare_segmentation(d.test, 16, 16);
    CHECK(evaluate_segmentation(*r.model, test).error == best);
    const auto j = history_json(r.history);
    CHECK(j["epochs"].size() == 3);
    CHECK(history_csv(r.history).rfind("epoch,", 0) == 0);
}

TEST_CASE("classifier training is reproducible and checkpoints round trip") {
    testing_util::ScratchDir dir("clsckpt");
    const auto d = small_corpus(4, 3);
    const auto train = prepare_classification(d.train, {}, 32, 16);
    const auto test = prepare_classification(d.test, {}, 32, 16);
    REQUIRE(train.size() == 9);
    CHECK(train[0].roi.height() == 16);
    auto tc = quick(Task::classification, 2);
    auto aug = data::AugmentPolicy{};
    aug.multiplier = 5;
    tc.augment = aug;
    const auto cfg = fixtures::tiny_classifier(16, 4);
    auto a = train_classifier(train, test, cfg, tc);
    auto b = train_classifier(train, test, cfg, tc);
    for (std::size_t e = 0; e < 2; ++e) CHECK(a.history.epochs[e].train_loss == b.history.epochs[e].train_loss);
    REQUIRE(a.test_eval.has_value());
    CHECK(a.test_eval->t2.total == test.size());

    save_checkpoint(dir / "cls.json", *a.model);
    auto loaded = load_classifier<float>(dir / "cls.json");
    const auto x = fixtures::random_images<float>(3, 16, 16, 8);
    const auto la = a.model->forward(x), lb = loaded->forward(x);
    CHECK(same_values(la.t1, lb.t1));
    CHECK(same_values(la.t2, lb.t2));
    CHECK_THROWS_AS(load_segmentation<float>(dir / "cls.json"), LoadError);

    ClsPredictions pred;
    const auto ev = evaluate_classifier(*loaded, test, &pred);
    CHECK(pred.features.size() == test.size());
    CHECK(static_cast<int>(pred.features[0].size()) == loaded->feature_dim());
    CHECK(ev.t1.total == test.size());
}

TEST_CASE("the classifier keeps the latest epoch with the best combined accuracy") {
    const auto d = small_corpus(4, 3);
    const auto train = prepare_classification(d.train, {}, 32, 16);
    const auto test = prepare_classification(d.test, {}, 32, 16);
    auto r = train_classifier(train, test, fixtures::tiny_classifier(16, 4), quick(Task::classification, 4));
    double best = -1;
    int at = 0;
    for (const auto& e : r.history.epochs) {
        const double s = *e.test_t1_accuracy + *e.test_t2_accuracy;
        if (s >= best) {
            best = s;
            at = e.epoch;
        }
    }
    CHECK(r.history.best_epoch == at);
    REQUIRE(r.test_eval.has_value());
    CHECK(r.test_eval->t1.accuracy + r.test_eval->t2.accuracy == best);
    const auto ev = evaluate_classifier(*r.model, test);
    CHECK(ev.t1.accuracy == r.test_eval->t1.accuracy);
    CHECK(ev.t2.accuracy == r.test_eval->t2.accuracy);
}

TEST_CASE("classification rejects inconsistent labels and a mismatched ROI size") {
    const auto d = small_corpus(2, 4);
    auto train = prepare_classification(d.train, {}, 32, 16);
    auto tc = quick(Task::classification, 1);
    const auto cfg = fixtures::tiny_classifier(16, 2);
    auto bad = train;
    bad[0].t1 = 1 - bad[0].t1;
    CHECK_THROWS_AS(train_classifier(bad, {}, cfg, tc), ValidationError);
    const auto big = prepare_classification(d.train, {}, 32, 32);
    CHECK_THROWS(train_classifier(big, {}, cfg, tc));
}

TEST_CASE("pipeline stages and timings") {
    testing_util::ScratchDir dir("pipeline");
    seg::PyramidNet<float> seg(fixtures::tiny_pyramid(3, 16), 1);
    cls::MultitaskNet<float> clf(fixtures::tiny_classifier(16), 2);
    seg.set_training(false);
    clf.set_training(false);
    save_checkpoint(dir / "seg.json", seg);
    save_checkpoint(dir / "cls.json", clf);
    const auto d = small_corpus(1, 5);
    write_png(dir / "eye.png", d.train[0].image);

    const auto direct = run_pipeline(d.train[0].image, seg, clf);
    CHECK(direct.raw_mask.height() == 16);
    CHECK(direct.roi.height() == 16);
    const auto& t = direct.timings;
    CHECK(t.total >= t.stage_sum() - 1e-3);
    const auto via_files = run_pipeline(dir / "eye.png", dir / "seg.json", dir / "cls.json");
    CHECK(via_files.output.p_t1 == direct.output.p_t1);
    CHECK(via_files.mask == direct.mask);
    CHECK(via_files.timings.load > 0);
    CHECK_THROWS_AS(run_pipeline(dir / "missing.png", dir / "seg.json", dir / "cls.json"), LoadError);
}

TEST_CASE("ablation rejects levels outside the pyramid before training") {
    const auto d = small_corpus(2, 6);
    const auto cfg = fixtures::tiny_pyramid(3, 16);
    CHECK_THROWS_AS(run_ablation(d, cfg, quick(Task::segmentation, 1), {2, 4}), ParameterError);
    const auto rows = run_ablation(d, cfg, quick(Task::segmentation, 1), {2, 3});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].level == 2);
    CHECK(rows[1].seg_error >= 0);
}
