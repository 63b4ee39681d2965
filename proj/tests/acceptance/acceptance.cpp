// One line per acceptance criterion: "criterion N: PASS|FAIL  detail".
// Exit status is non-zero when any selected criterion fails.
//
//   mtcd_acceptance [--criteria 1,2,...] [--verbose]
//
// When 8 and 10 run together, two further checks reuse their trained models
// and print "extra" lines.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mtcd/cls/multitask_net.hpp"
#include "mtcd/data/manifest.hpp"
#include "mtcd/harness/checkpoint.hpp"
#include "mtcd/harness/pipeline.hpp"
#include "mtcd/harness/training.hpp"
#include "mtcd/metrics.hpp"
#include "mtcd/nn/serialize.hpp"
#include "mtcd/postprocess.hpp"
#include "mtcd/report/embedding.hpp"
#include "mtcd/seg/pyramid_net.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace mtcd;

namespace {

using Clock = std::chrono::steady_clock;

bool g_verbose = false;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void note(const std::string& s) {
    if (g_verbose) std::fprintf(stderr, "  %s\n", s.c_str());
}

// ---- 1 -------------------------------------------------------------------

Verdict metric_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> density(0.05, 0.95);
    std::vector<BinaryMask> all_gt, all_pred;
    int mismatches = 0;
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        auto gt = oracle::random_mask(16, 16, density(rng), rng);
        auto pred = oracle::random_mask(16, 16, density(rng), rng);
        const auto r = seg_error({gt}, {pred});
        const auto o = oracle::xor_error({gt}, {pred});
        if (r.disagreeing_pixels != o.disagree || r.error != o.error()) ++mismatches;
        worst = std::max(worst, std::abs(r.error - o.error()));
        all_gt.push_back(std::move(gt));
        all_pred.push_back(std::move(pred));
    }
    const auto r = seg_error(all_gt, all_pred);
    const auto o = oracle::xor_error(all_gt, all_pred);
    if (r.disagreeing_pixels != o.disagree || r.error != o.error()) ++mismatches;
    const double t = seconds_since(t0);
    return {mismatches == 0 && t < 5.0,
            fmt("100 pairs + pooled set, %d mismatches, max |diff| %.1e, pooled error %.6f, %.2f s", mismatches,
                worst, r.error, t)};
}

// ---- 2 -------------------------------------------------------------------

Verdict pyramid_shapes() {
    const auto t0 = Clock::now();
    std::vector<std::string> problems;
    for (int n : {3, 4, 5}) {
        seg::PyramidConfig c;
        c.n_blocks = n;
        c.layers_per_block.resize(static_cast<std::size_t>(n));
        c.structural_levels = n;
        seg::PyramidNet<float> net(c, 7);
        net.set_training(false);
        const auto x = fixtures::random_images<float>(1, c.input_height, c.input_width, 3);
        const auto out = net.forward_pyramid(x);
        if (static_cast<int>(out.levels.size()) != n) problems.push_back(fmt("n=%d: %zu levels", n, out.levels.size()));
        for (int j = 1; j <= static_cast<int>(out.levels.size()); ++j) {
            const auto& lv = out.levels[static_cast<std::size_t>(j - 1)];
            if (static_cast<int>(lv.maps.size()) != n - (j - 1))
                problems.push_back(fmt("n=%d level %d: %zu maps", n, j, lv.maps.size()));
            for (int i = 1; i <= static_cast<int>(lv.maps.size()); ++i) {
                const auto& m = lv.maps[static_cast<std::size_t>(i - 1)];
                const auto [h, w] = c.block_resolution(i);
                if (m.c() != 2 || m.h() != h || m.w() != w)
                    problems.push_back(fmt("n=%d f_%d^%d is %s", n, j, i, nn::shape_string(m.shape()).c_str()));
            }
        }
        const auto masks = net.predict_mask(x);
        if (masks.size() != 1 || masks[0].mask.height() != c.input_height || masks[0].mask.width() != c.input_width)
            problems.push_back(fmt("n=%d: mask resolution differs from input", n));
    }
    const double t = seconds_since(t0);
    for (const auto& p : problems) note(p);
    return {problems.empty() && t < 30.0,
            fmt("n_blocks 3/4/5 at 224x224, %zu violations, %.2f s", problems.size(), t)};
}

// ---- 3 -------------------------------------------------------------------

Verdict fusion_identity() {
    const auto t0 = Clock::now();
    std::mt19937_64 g(3);
    std::normal_distribution<double> d;
    nn::Rng rng(0);
    seg::Fusion<double> f(rng);
    const int n = 2, h = 14, w = 10;
    nn::Tensor<double> fa(n, 2, 2 * h, 2 * w), fb(n, 2, h, w);
    for (auto& v : fa.values()) v = d(g);
    for (auto& v : fb.values()) v = d(g);

    // Deconvolution is nearest-neighbour from construction; reset it anyway.
    f.deconv().set_nearest_neighbor();
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
    const auto out = f.forward(fa, fb);
    std::size_t diff_a = 0;
    for (std::size_t i = 0; i < out.size(); ++i) diff_a += out[i] != fa[i];

    // Both halves of the concatenation against independent references.
    const auto& cat = f.last_concat();
    std::size_t diff_up = 0;
    for (int s_ = 0; s_ < n; ++s_)
        for (int c = 0; c < 2; ++c) {
            const std::vector<double> plane(fb.channel(s_, c), fb.channel(s_, c) + h * w);
            const auto up = oracle::upsample_nearest(plane, h, w);
            for (int i = 0; i < 4 * h * w; ++i) {
                diff_up += cat.channel(s_, c + 2)[i] != up[static_cast<std::size_t>(i)];
                diff_up += cat.channel(s_, c)[i] != fa.channel(s_, c)[i];
            }
        }
    select(2);
    const auto out_b = f.forward(fa, fb);
    std::size_t diff_b = 0;
    for (int s_ = 0; s_ < n; ++s_)
        for (int c = 0; c < 2; ++c) {
            const std::vector<double> plane(fb.channel(s_, c), fb.channel(s_, c) + h * w);
            const auto up = oracle::upsample_nearest(plane, h, w);
            for (int i = 0; i < 4 * h * w; ++i) diff_b += out_b.channel(s_, c)[i] != up[static_cast<std::size_t>(i)];
        }
    const double t = seconds_since(t0);
    return {diff_a == 0 && diff_up == 0 && diff_b == 0 && t < 5.0,
            fmt("fuse(f_a,f_b) = f_a: %zu differing values; concat vs oracle: %zu; selecting the deconvolved "
                "half vs upsample oracle: %zu; %.3f s",
                diff_a, diff_up, diff_b, t)};
}

// ---- 4 -------------------------------------------------------------------

Verdict gradient_checks() {
    const auto t0 = Clock::now();
    double worst = 0;
    std::size_t checked = 0;
    std::vector<std::string> parts;
    for (int levels : {3, 2}) {
        seg::PyramidNet<double> net(fixtures::tiny_pyramid(3, 8, levels), 5);
        const auto x = fixtures::random_images<double>(2, 8, 8, 6);
        const auto gt = fixtures::random_disks(2, 8, 8, 7);
        net.state().zero_grad();
        net.backward(seg::seg_loss_from_logits(net.forward_pyramid(x).logits, gt).grad);
        const auto r = oracle::check_gradients(
            net.state(), [&] { return seg::seg_loss_from_logits(net.forward_pyramid(x).logits, gt).loss; }, 1e-5);
        worst = std::max(worst, r.max_rel);
        checked += r.checked;
        parts.push_back(fmt("seg_loss L%d %zu params max %.1e", levels, r.checked, r.max_rel));
        note("worst " + r.worst);
    }
    {
        cls::MultitaskNet<double> net(fixtures::tiny_classifier(16), 4);
        const auto x = fixtures::random_images<double>(3, 16, 16, 5);
        const std::vector<int> y1{1, 0, 1}, y2{0, 2, 1};
        net.state().zero_grad();
        const auto l = cls::multitask_loss(net.forward(x), y1, y2, {0.5});
        net.backward(l.grad_t1, l.grad_t2);
        const auto r = oracle::check_gradients(
            net.state(), [&] { return cls::multitask_loss(net.forward(x), y1, y2, {0.5}).loss; }, 1e-5);
        worst = std::max(worst, r.max_rel);
        checked += r.checked;
        parts.push_back(fmt("total_loss %zu params max %.1e", r.checked, r.max_rel));
        note("worst " + r.worst);
    }
    const double t = seconds_since(t0);
    std::string detail;
    for (const auto& p : parts) detail += p + "; ";
    return {worst < 1e-4 && t < 120.0, detail + fmt("%zu parameters, %.1f s", checked, t)};
}

// ---- 5 -------------------------------------------------------------------

Verdict loss_closed_forms() {
    // Reference values from the definitions, not from the library.
    const double ln2 = std::log(2.0), ln3 = std::log(3.0);
    const double total_ref = 0.5 * ln2 + ln3;
    const double third = 1.0 / 3.0;
    const double b1 = cls::bce(0.5, 1), b0 = cls::bce(0.5, 0);
    const double c = cls::cce({third, third, third}, 0);
    const double t = cls::total_loss(0.5, 1, {third, third, third}, 2, {0.5});

    // The same through the network path: zeroed heads give p = 0.5 and a
    // uniform distribution.
    cls::MultitaskNet<double> net(fixtures::tiny_classifier(16), 1);
    net.zero_heads();
    const auto l = cls::multitask_loss(net.forward(fixtures::random_images<double>(2, 16, 16, 2)), {0, 1}, {1, 2}, {0.5});

    const bool ok = std::abs(b1 - ln2) <= 1e-12 && std::abs(b0 - ln2) <= 1e-12 && std::abs(c - ln3) <= 1e-12 &&
                    std::abs(t - total_ref) <= 1e-9 && std::abs(l.loss - total_ref) <= 1e-9 &&
                    std::abs(total_ref - 1.445186) < 5e-7;
    return {ok, fmt("BCE(0.5) %.15f (ln 2 %.15f), CCE(uniform) %.15f (ln 3 %.15f), total %.12f, via network %.12f, "
                    "reference %.12f",
                    b1, ln2, c, ln3, t, l.loss, total_ref)};
}

// ---- 6 -------------------------------------------------------------------

Verdict morphology() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> density(0.1, 0.9);
    int mismatches = 0, property_failures = 0;
    const StructuringElement se;  // the default used by the pipeline
    auto subset = [](const BinaryMask& a, const BinaryMask& b) {
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a.pixels()[k] && !b.pixels()[k]) return false;
        return true;
    };
    for (int k = 0; k < 200; ++k) {
        const auto m = oracle::random_mask(32, 32, density(rng), rng);
        const auto c = close(m, se);
        if (!(c == oracle::window_close(m, se.radius))) ++mismatches;
        for (auto shape : {StructuringElement::Shape::square, StructuringElement::Shape::disk}) {
            const StructuringElement e{shape, 1 + k % 3};
            const auto cm = close(m, e);
            auto bigger = m;
            const auto extra = oracle::random_mask(32, 32, 0.1, rng);
            for (std::size_t i = 0; i < bigger.size(); ++i) bigger.pixels()[i] |= extra.pixels()[i];
            if (!subset(m, cm)) ++property_failures;              // extensive
            if (!(close(cm, e) == cm)) ++property_failures;       // idempotent
            if (!subset(cm, close(bigger, e))) ++property_failures;  // monotone
        }
    }
    const double t = seconds_since(t0);
    return {mismatches == 0 && property_failures == 0 && t < 30.0,
            fmt("200 masks: %d oracle mismatches, %d property failures (extensive, idempotent, monotone; square and "
                "disk), %.2f s",
                mismatches, property_failures, t)};
}

// ---- 7 -------------------------------------------------------------------

Verdict parameter_budget() {
    seg::PyramidNet<float> net(seg::PyramidConfig{}, 0);
    const int convs = net.backbone_conv_count();
    const std::size_t params = net.parameter_count();
    return {convs == 43 && params >= 500000 && params <= 2000000,
            fmt("%d backbone convolution layers, %zu trainable parameters (band 0.5M to 2.0M)", convs, params)};
}

// ---- 8 and 9 ---------------------------------------------------------------

/// 150 train and 30 test images (50 and 10 per class).
data::Dataset seg_corpus() {
    data::CorpusOptions o;
    o.n_per_class = 60;
    o.test_fraction = 1.0 / 6.0;
    o.seed = 2024;
    return data::synthesize_dataset(o);
}

harness::TrainConfig seg_schedule(std::uint64_t seed) {
    auto c = harness::TrainConfig::defaults(harness::Task::segmentation);
    c.epochs = 20;
    c.augment.reset();
    c.seed = seed;
    return c;
}

struct SegRun {
    std::shared_ptr<seg::PyramidNet<float>> model;
    double final_error = 0;  // error after the last epoch, no selection
    double best_error = 0;
    int best_epoch = 0;
    double seconds = 0;
};

SegRun run_segmentation(const data::Dataset& d, int levels, std::uint64_t seed) {
    const auto t0 = Clock::now();
    seg::PyramidConfig c;
    c.structural_levels = levels;
    auto r = harness::train_segmentation(d, c, seg_schedule(seed), [&](const harness::SegEpoch& e) {
        note(fmt("L%d seed %llu epoch %2d loss %.5f test error %.5f (%.0f s)", levels,
                 static_cast<unsigned long long>(seed), e.epoch, e.train_loss, e.test_error.value_or(-1), e.seconds));
    });
    SegRun out;
    out.model = std::move(r.model);
    out.final_error = *r.history.epochs.back().test_error;
    out.best_error = *r.history.best_test_error;
    out.best_epoch = r.history.best_epoch;
    out.seconds = seconds_since(t0);
    return out;
}

struct SegCache {
    std::optional<data::Dataset> corpus;
    double corpus_seconds = 0;
    std::map<std::pair<int, std::uint64_t>, SegRun> runs;

    const data::Dataset& dataset() {
        if (!corpus) {
            const auto t0 = Clock::now();
            corpus = seg_corpus();
            corpus_seconds = seconds_since(t0);
        }
        return *corpus;
    }
    const SegRun& run(int levels, std::uint64_t seed) {
        const auto key = std::make_pair(levels, seed);
        auto it = runs.find(key);
        if (it == runs.end()) it = runs.emplace(key, run_segmentation(dataset(), levels, seed)).first;
        return it->second;
    }
};

SegCache g_seg;

Verdict segmentation_training() {
    const auto& d = g_seg.dataset();
    const auto& r = g_seg.run(5, 1);
    const double minutes = (r.seconds + g_seg.corpus_seconds) / 60.0;
    const bool ok = d.train.size() == 150 && d.test.size() == 30 && r.final_error <= 0.05 && r.best_error <= 0.05 &&
                    minutes <= 45.0;
    return {ok, fmt("%zu/%zu images, 20 epochs: test seg error %.5f after the last epoch, %.5f at best epoch %d; "
                    "%.1f min",
                    d.train.size(), d.test.size(), r.final_error, r.best_error, r.best_epoch, minutes)};
}

Verdict ablation_ordering() {
    int ordered = 0;
    double mean5 = 0, mean2 = 0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const double e5 = g_seg.run(5, seed).final_error;
        const double e2 = g_seg.run(2, seed).final_error;
        ordered += e5 <= e2;
        mean5 += e5 / 5;
        mean2 += e2 / 5;
        per_seed += fmt(" s%llu %.5f/%.5f", static_cast<unsigned long long>(seed), e5, e2);
    }
    return {ordered >= 4 && mean5 <= mean2,
            fmt("mean L5 %.5f vs L2 %.5f, L5 <= L2 in %d/5 seeds (L5/L2:%s)", mean5, mean2, ordered,
                per_seed.c_str())};
}

// ---- 10 ------------------------------------------------------------------

struct ClsRun {
    std::shared_ptr<cls::MultitaskNet<float>> model;
    std::vector<data::EyeSample> test_samples;
    std::vector<harness::ClsExample> test;
};
std::optional<ClsRun> g_cls;

Verdict classification_training() {
    const auto t0 = Clock::now();
    data::CorpusOptions o;
    o.n_per_class = 100;
    o.test_fraction = 0.2;
    o.seed = 4048;
    const auto d = data::synthesize_dataset(o);
    const auto train = harness::prepare_classification(d.train);
    const auto test = harness::prepare_classification(d.test);

    cls::ClassifierConfig cfg;  // small_scratch at 224
    auto tc = harness::TrainConfig::defaults(harness::Task::classification);
    tc.epochs = 30;
    tc.lr = 1e-3;
    tc.lambda = 0.5;
    tc.augment.reset();
    tc.seed = 1;
    auto r = harness::train_classifier(train, test, cfg, tc, [](const harness::ClsEpoch& e) {
        note(fmt("epoch %2d loss %.4f T1 %.3f T2 %.3f (%.0f s)", e.epoch, e.train_loss, e.test_t1_accuracy.value_or(-1),
                 e.test_t2_accuracy.value_or(-1), e.seconds));
    });
    // Last-epoch weights would differ from the returned best-epoch model;
    // report both and gate on the weaker of the two.
    const auto& last = r.history.epochs.back();
    const auto ev = harness::evaluate_classifier(*r.model, test);
    const double t1 = std::min(ev.t1.accuracy, *last.test_t1_accuracy);
    const double t2 = std::min(ev.t2.accuracy, *last.test_t2_accuracy);

    const auto& cm = ev.t2.confusion;
    std::size_t errors = 0;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t p = 0; p < 3; ++p)
            if (a != p) errors += cm[a][p];
    const std::size_t pre_post = cm[cls::kPreCataract][cls::kPostCataract] + cm[cls::kPostCataract][cls::kPreCataract];
    const bool concentrated = errors == 0 || 2 * pre_post >= errors;
    std::string cm_text;
    for (const auto& row : cm) cm_text += fmt("[%zu %zu %zu]", row[0], row[1], row[2]);

    g_cls = ClsRun{std::move(r.model), d.test, test};
    const double minutes = seconds_since(t0) / 60.0;
    const bool ok = train.size() == 240 && test.size() == 60 && t1 >= 0.95 && t2 >= 0.85 && concentrated;
    return {ok, fmt("%zu/%zu ROIs, 30 epochs: T1 %.4f, T2 %.4f (last epoch %.4f/%.4f, best epoch %d); T2 confusion "
                    "%s, %zu errors of which %zu pre<->post%s; %.1f min",
                    train.size(), test.size(), ev.t1.accuracy, ev.t2.accuracy, *last.test_t1_accuracy,
                    *last.test_t2_accuracy, r.history.best_epoch, cm_text.c_str(), errors, pre_post,
                    errors == 0 ? " (no errors, so no concentration to observe)" : "", minutes) +
                    (t1 != ev.t1.accuracy || t2 != ev.t2.accuracy ? "; gated on the last epoch" : "")};
}

// ---- checks that need the trained models of 8 and 10 -----------------------

Verdict pipeline_on_healthy() {
    auto segm = g_seg.run(5, 1).model;
    int right = 0, total = 0;
    for (const auto& s : g_cls->test_samples) {
        if (s.label_t2 != data::T2Label::others) continue;
        const auto r = harness::run_pipeline(s.image, *segm, *g_cls->model);
        right += r.output.p_t1 < 0.5 && r.output.predicted_t2() == cls::kOthers;
        ++total;
    }
    return {total > 0 && right == total,
            fmt("%d/%d healthy test images end-to-end (predicted mask, closing, ROI, classifier) give p_t1 < 0.5 and "
                "T2 = others",
                right, total)};
}

Verdict embedding_separation() {
    harness::ClsPredictions pred;
    harness::evaluate_classifier(*g_cls->model, g_cls->test, &pred);
    std::vector<int> labels;
    for (const auto& e : g_cls->test) labels.push_back(e.t1);
    report::TsneOptions o;
    o.seed = 0;
    const auto pts = report::tsne(pred.features, o);
    const double s = report::silhouette(pts, labels);
    return {s > 0.2, fmt("T1 silhouette %.3f of the t-SNE projection of %zu test features (perplexity %.0f, seed 0)", s,
                         pts.size(), o.perplexity)};
}

// ---- 11 ------------------------------------------------------------------

Verdict determinism() {
    testing_util::ScratchDir dir("acceptance11");
    data::CorpusOptions o;
    o.n_per_class = 4;
    o.canvas_height = 48;
    o.canvas_width = 64;
    o.seed = 11;
    o.test_fraction = 0.25;
    const auto d = data::synthesize_dataset(o);
    std::vector<std::string> problems;

    auto tseg = harness::TrainConfig::defaults(harness::Task::segmentation);
    tseg.epochs = 3;
    tseg.seed = 5;  // keeps the 10x augmentation so the shuffled order has work to do
    const auto cfg = fixtures::tiny_pyramid(3, 32);
    auto a = harness::train_segmentation(d, cfg, tseg);
    auto b = harness::train_segmentation(d, cfg, tseg);
    for (std::size_t e = 0; e < a.history.epochs.size(); ++e)
        if (a.history.epochs[e].train_loss != b.history.epochs[e].train_loss ||
            a.history.epochs[e].test_error != b.history.epochs[e].test_error)
            problems.push_back(fmt("segmentation epoch %zu differs", e + 1));

    auto tcls = harness::TrainConfig::defaults(harness::Task::classification);
    tcls.epochs = 3;
    tcls.lr = 1e-3;
    tcls.seed = 5;
    const auto train = harness::prepare_classification(d.train, {}, 64, 32);
    const auto test = harness::prepare_classification(d.test, {}, 64, 32);
    const auto ccfg = fixtures::tiny_classifier(32, 4);
    auto ca = harness::train_classifier(train, test, ccfg, tcls);
    auto cb = harness::train_classifier(train, test, ccfg, tcls);
    for (std::size_t e = 0; e < ca.history.epochs.size(); ++e)
        if (ca.history.epochs[e].train_loss != cb.history.epochs[e].train_loss)
            problems.push_back(fmt("classification epoch %zu differs", e + 1));

    harness::save_checkpoint(dir / "seg.json", *a.model);
    harness::save_checkpoint(dir / "cls.json", *ca.model);
    auto seg2 = harness::load_segmentation<float>(dir / "seg.json");
    auto cls2 = harness::load_classifier<float>(dir / "cls.json");
    const auto xs = fixtures::random_images<float>(3, 32, 32, 9);
    const auto la = a.model->forward_pyramid(xs).logits, lb = seg2->forward_pyramid(xs).logits;
    if (la.values() != lb.values()) problems.push_back("segmentation logits differ after reload");
    const auto oa = ca.model->forward(xs), ob = cls2->forward(xs);
    if (oa.t1.values() != ob.t1.values() || oa.t2.values() != ob.t2.values() ||
        oa.features.values() != ob.features.values())
        problems.push_back("classifier outputs differ after reload");
    if (nn::weights_digest(a.model->state()) != nn::weights_digest(seg2->state()))
        problems.push_back("segmentation weights digest differs");
    for (const auto& p : problems) note(p);
    return {problems.empty(),
            fmt("%zu+%zu epochs repeated with identical losses, reload bit-exact for both models; %zu problems",
                a.history.epochs.size(), ca.history.epochs.size(), problems.size())};
}

std::set<int> parse_criteria(const std::string& s) {
    std::set<int> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const int v = std::atoi(tok.c_str());
        if (v < 1 || v > 11) throw std::invalid_argument("criteria are numbered 1 to 11, got '" + tok + "'");
        out.insert(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criteria" && i + 1 < argc) {
            try {
                selected = parse_criteria(argv[++i]);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "%s\n", e.what());
                return 2;
            }
        } else if (a == "--verbose") {
            g_verbose = true;
        } else {
            std::fprintf(stderr, "usage: %s [--criteria 1,2,...] [--verbose]\n", argv[0]);
            return 2;
        }
    }
    if (selected.empty())
        for (int c = 1; c <= 11; ++c) selected.insert(c);

    const std::map<int, std::pair<const char*, std::function<Verdict()>>> table{
        {1, {"metric oracle equivalence", metric_oracle}},
        {2, {"pyramid shape laws", pyramid_shapes}},
        {3, {"fusion identity construction", fusion_identity}},
        {4, {"gradient checks", gradient_checks}},
        {5, {"loss closed forms", loss_closed_forms}},
        {6, {"morphology oracle", morphology}},
        {7, {"parameter budget", parameter_budget}},
        {8, {"desk-scale segmentation training", segmentation_training}},
        {9, {"ablation ordering", ablation_ordering}},
        {10, {"desk-scale multitask training", classification_training}},
        {11, {"determinism and persistence", determinism}},
    };

    int failed = 0;
    for (int c : selected) {
        const auto& [name, fn] = table.at(c);
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("criterion %2d: %s  %s: %s\n", c, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    if (selected.count(8) && selected.count(10) && g_cls) {
        const std::vector<std::pair<const char*, std::function<Verdict()>>> extras{
            {"pipeline on healthy input", pipeline_on_healthy},
            {"embedding separation", embedding_separation},
        };
        for (const auto& [name, fn] : extras) {
            Verdict v;
            try {
                v = fn();
            } catch (const std::exception& e) {
                v = {false, std::string("exception: ") + e.what()};
            }
            failed += !v.pass;
            std::printf("extra       : %s  %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
            std::fflush(stdout);
        }
    }
    return failed == 0 ? 0 : 1;
}
