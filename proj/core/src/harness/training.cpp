#include "mtcd/harness/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "mtcd/nn/adam.hpp"
#include "mtcd/nn/serialize.hpp"

namespace mtcd::harness {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

nn::AdamOptions adam_options(const TrainConfig& c) { return {c.lr, c.beta1, c.beta2, c.eps}; }

/// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

// Separate stream for batch order so that it does not depend on how many
// draws weight initialisation makes.
std::mt19937_64 order_rng(std::uint64_t seed) { return std::mt19937_64(seed ^ 0x9e3779b97f4a7c15ULL); }

std::string rng_digest(const std::mt19937_64& rng) {
    std::ostringstream s;
    s << rng;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::string csv_value(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream s;
    s.precision(10);
    s << *v;
    return s.str();
}

RealImage flip_real(const RealImage& src) {
    RealImage out(src.height(), src.width());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x) out(y, x) = src(y, src.width() - 1 - x);
    return out;
}

RealImage contrast_real(const RealImage& src, double factor) {
    if (factor == 1.0) return src;
    double sum = 0;
    for (float v : src.pixels()) sum += v;
    const double mean = sum / static_cast<double>(src.size());
    RealImage out(src.height(), src.width());
    for (std::size_t k = 0; k < src.size(); ++k)
        out.pixels()[k] = static_cast<float>(std::clamp(mean + factor * (src.pixels()[k] - mean), 0.0, 1.0));
    return out;
}

/// ROI-level mirror of data::augment: same ordering and multiplier rules.
std::vector<ClsExample> augment_rois(const std::vector<ClsExample>& src, const data::AugmentPolicy& policy) {
    policy.validate();
    std::vector<ClsExample> out;
    for (const auto& e : src) {
        std::vector<std::pair<bool, double>> plan;
        if (policy.multiplier == 10) {
            for (bool flip : {false, true})
                for (double f : policy.contrast_factors) plan.emplace_back(flip, f);
        } else {
            plan.emplace_back(false, 1.0);
            if (policy.flips == data::AugmentPolicy::Flips::horizontal) plan.emplace_back(true, 1.0);
            for (double f : policy.contrast_factors)
                if (plan.size() < 5 && f != 1.0) plan.emplace_back(false, f);
        }
        for (const auto& [flip, f] : plan) {
            ClsExample v = e;
            v.roi = contrast_real(flip ? flip_real(e.roi) : e.roi, f);
            out.push_back(std::move(v));
        }
    }
    return out;
}

} // namespace

// ---- segmentation -------------------------------------------------------

std::vector<SegExample> prepare_segmentation(const std::vector<data::EyeSample>& samples, int height, int width,
                                             bool require_masks) {
    std::vector<SegExample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        s.validate();
        SegExample e;
        e.id = s.sample_id;
        e.image = to_unit_range(resize_bilinear(s.image, height, width));
        if (s.mask)
            e.mask = resize_nearest(*s.mask, height, width);
        else if (require_masks)
            throw ValidationError("sample " + s.sample_id + " has no ground-truth mask");
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<BinaryMask> predict_masks(seg::PyramidNet<float>& model, const std::vector<RealImage>& images,
                                      int batch_size) {
    const bool was_training = model.training();
    model.set_training(false);
    std::vector<BinaryMask> out;
    out.reserve(images.size());
    for (std::size_t b = 0; b < images.size(); b += static_cast<std::size_t>(batch_size)) {
        const std::size_t e = std::min(images.size(), b + static_cast<std::size_t>(batch_size));
        std::vector<RealImage> batch(images.begin() + static_cast<long>(b), images.begin() + static_cast<long>(e));
        for (auto& p : model.predict_mask(seg::images_to_tensor<float>(batch))) out.push_back(std::move(p.mask));
    }
    model.set_training(was_training);
    return out;
}

SegEvalResult evaluate_segmentation(seg::PyramidNet<float>& model, const std::vector<SegExample>& examples,
                                    std::vector<BinaryMask>* predictions, int batch_size) {
    std::vector<RealImage> images;
    std::vector<BinaryMask> gt;
    for (const auto& e : examples) {
        images.push_back(e.image);
        gt.push_back(e.mask);
    }
    auto pred = predict_masks(model, images, batch_size);
    SegEvalResult r = seg_error(gt, pred);
    if (predictions) *predictions = std::move(pred);
    return r;
}

SegTrainResult train_segmentation(const data::Dataset& dataset, const seg::PyramidConfig& config,
                                  const TrainConfig& train, const SegEpochCallback& on_epoch) {
    train.validate();
    config.validate();
    if (dataset.train.empty()) throw ValidationError("train_segmentation: empty train split");

    std::vector<data::EyeSample> train_samples;
    if (train.augment) {
        for (const auto& s : dataset.train) {
            if (!s.mask) throw ValidationError("sample " + s.sample_id + " has no ground-truth mask");
            for (auto& a : data::augment(s, *train.augment)) train_samples.push_back(std::move(a));
        }
    }
    const auto train_set = prepare_segmentation(train.augment ? train_samples : dataset.train,
                                                config.input_height, config.input_width);
    train_samples.clear();
    const auto test_set = prepare_segmentation(dataset.test, config.input_height, config.input_width);

    SegTrainResult result;
    result.model = std::make_unique<seg::PyramidNet<float>>(config, train.seed);
    auto& model = *result.model;
    nn::Adam<float> adam(model.state(), adam_options(train));
    auto rng = order_rng(train.seed);
    nn::StateSnapshot<float> best;

    for (int epoch = 1; epoch <= train.epochs; ++epoch) {
        const auto t0 = Clock::now();
        model.set_training(true);
        const auto order = permutation(train_set.size(), rng);
        double loss_sum = 0;
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(train.batch_size)) {
            const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(train.batch_size));
            std::vector<RealImage> images;
            std::vector<BinaryMask> masks;
            for (std::size_t k = b; k < e; ++k) {
                images.push_back(train_set[order[k]].image);
                masks.push_back(train_set[order[k]].mask);
            }
            const auto out = model.forward_pyramid(seg::images_to_tensor<float>(images));
            const auto lg = seg::seg_loss_from_logits(out.logits, masks);
            model.state().zero_grad();
            model.backward(lg.grad);
            adam.step();
            loss_sum += lg.loss * static_cast<double>(e - b);
        }

        SegEpoch rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        if (!test_set.empty()) {
            rec.test_error = evaluate_segmentation(model, test_set).error;
            if (!result.history.best_test_error || *rec.test_error < *result.history.best_test_error) {
                result.history.best_test_error = rec.test_error;
                result.history.best_epoch = epoch;
                best = nn::capture_state(model.state());
            }
        }
        rec.seconds = seconds_since(t0);
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }

    result.history.rng_state_digest = rng_digest(rng);
    if (best.empty())
        result.history.best_epoch = train.epochs;
    else
        nn::restore_state(model.state(), best);
    model.set_training(false);
    return result;
}

json history_json(const SegHistory& h) {
    json epochs = json::array();
    for (const auto& e : h.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"test_seg_error", optional_json(e.test_error)},
                          {"seconds", e.seconds}});
    return {{"task", "segmentation"},
            {"epochs", epochs},
            {"best_epoch", h.best_epoch},
            {"best_test_seg_error", optional_json(h.best_test_error)},
            {"rng_state_digest", h.rng_state_digest}};
}

std::string history_csv(const SegHistory& h) {
    std::ostringstream s;
    s.precision(10);
    s << "epoch,train_loss,test_seg_error,seconds\n";
    for (const auto& e : h.epochs)
        s << e.epoch << ',' << e.train_loss << ',' << csv_value(e.test_error) << ',' << e.seconds << '\n';
    return s.str();
}

// ---- classification -----------------------------------------------------

RoiResult roi_from_mask(const GrayImage& image, const BinaryMask& mask, const StructuringElement& se,
                        int roi_size) {
    const RealImage resized = to_unit_range(resize_bilinear(image, mask.height(), mask.width()));
    return extract_roi(resized, close(mask, se), roi_size);
}

std::vector<ClsExample> prepare_classification(const std::vector<data::EyeSample>& samples,
                                               const StructuringElement& se, int mask_size, int roi_size) {
    std::vector<ClsExample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        s.validate();
        if (!s.mask) throw ValidationError("sample " + s.sample_id + " has no mask to cut a ROI from");
        if (!s.label_t2) throw ValidationError("sample " + s.sample_id + " has no T2 label");
        const data::T1Label t1 = s.label_t1.value_or(data::implied_t1(*s.label_t2));
        const auto roi = roi_from_mask(s.image, resize_nearest(*s.mask, mask_size, mask_size), se, roi_size);
        ClsExample e;
        e.roi = roi.roi;
        e.empty_mask = roi.empty_mask;
        e.t1 = static_cast<int>(t1);
        e.t2 = static_cast<int>(*s.label_t2);
        e.id = s.sample_id;
        out.push_back(std::move(e));
    }
    return out;
}

ClsPredictions predict_classes(cls::MultitaskNet<float>& model, const std::vector<RealImage>& rois,
                               int batch_size) {
    model.set_training(false);
    ClsPredictions p;
    for (std::size_t b = 0; b < rois.size(); b += static_cast<std::size_t>(batch_size)) {
        const std::size_t e = std::min(rois.size(), b + static_cast<std::size_t>(batch_size));
        std::vector<RealImage> batch(rois.begin() + static_cast<long>(b), rois.begin() + static_cast<long>(e));
        const auto logits = model.forward(seg::images_to_tensor<float>(batch));
        for (auto& o : cls::outputs_from_logits(logits)) p.outputs.push_back(o);
        const int f = logits.features.c();
        for (int i = 0; i < logits.features.n(); ++i) {
            const float* row = logits.features.sample(i);
            p.features.emplace_back(row, row + f);
        }
    }
    return p;
}

MultitaskEval evaluate_classifier(cls::MultitaskNet<float>& model, const std::vector<ClsExample>& examples,
                                  ClsPredictions* predictions) {
    if (examples.empty()) throw ValidationError("evaluate_classifier: no samples");
    std::vector<RealImage> rois;
    std::vector<int> y1, y2;
    for (const auto& e : examples) {
        rois.push_back(e.roi);
        y1.push_back(e.t1);
        y2.push_back(e.t2);
    }
    auto p = predict_classes(model, rois);
    std::vector<int> p1, p2;
    for (const auto& o : p.outputs) {
        p1.push_back(o.predicted_t1());
        p2.push_back(o.predicted_t2());
    }
    if (predictions) *predictions = std::move(p);
    return cls_eval(p1, y1, p2, y2);
}

ClsTrainResult train_classifier(const std::vector<ClsExample>& train_set, const std::vector<ClsExample>& test_set,
                                const cls::ClassifierConfig& config, const TrainConfig& train,
                                const ClsEpochCallback& on_epoch) {
    train.validate();
    config.validate();
    if (train_set.empty()) throw ValidationError("train_classifier: empty train split");
    for (const auto* set : {&train_set, &test_set})
        for (const auto& e : *set)
            if (e.t1 < 0 || e.t1 > 1 || e.t2 < 0 || e.t2 > 2 ||
                e.t1 != static_cast<int>(data::implied_t1(static_cast<data::T2Label>(e.t2))))
                throw ValidationError("sample " + e.id + " has inconsistent T1/T2 labels");

    const std::vector<ClsExample> expanded = train.augment ? augment_rois(train_set, *train.augment) : train_set;

    ClsTrainResult result;
    result.model = std::make_unique<cls::MultitaskNet<float>>(config, train.seed);
    auto& model = *result.model;
    nn::Adam<float> adam(model.state(), adam_options(train));
    auto rng = order_rng(train.seed);
    nn::StateSnapshot<float> best;
    std::optional<double> best_score;
    const cls::LossWeights weights{train.lambda};

    for (int epoch = 1; epoch <= train.epochs; ++epoch) {
        const auto t0 = Clock::now();
        model.set_training(true);
        const auto order = permutation(expanded.size(), rng);
        ClsEpoch rec;
        rec.epoch = epoch;
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(train.batch_size)) {
            const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(train.batch_size));
            std::vector<RealImage> rois;
            std::vector<int> y1, y2;
            for (std::size_t k = b; k < e; ++k) {
                const auto& ex = expanded[order[k]];
                rois.push_back(ex.roi);
                y1.push_back(ex.t1);
                y2.push_back(ex.t2);
            }
            const auto logits = model.forward(seg::images_to_tensor<float>(rois));
            const auto lg = cls::multitask_loss(logits, y1, y2, weights);
            model.state().zero_grad();
            model.backward(lg.grad_t1, lg.grad_t2);
            adam.step();
            const double n = static_cast<double>(e - b);
            rec.train_loss += lg.loss * n;
            rec.train_bce += lg.bce * n;
            rec.train_cce += lg.cce * n;
        }
        const double total = static_cast<double>(expanded.size());
        rec.train_loss /= total;
        rec.train_bce /= total;
        rec.train_cce /= total;

        if (!test_set.empty()) {
            const auto ev = evaluate_classifier(model, test_set);
            rec.test_t1_accuracy = ev.t1.accuracy;
            rec.test_t2_accuracy = ev.t2.accuracy;
            // Both tasks count; ties go to the later epoch, which has seen more updates.
            const double score = ev.t1.accuracy + ev.t2.accuracy;
            if (!best_score || score >= *best_score) {
                best_score = score;
                result.history.best_epoch = epoch;
                result.test_eval = ev;
                best = nn::capture_state(model.state());
            }
        }
        rec.seconds = seconds_since(t0);
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }

    result.history.rng_state_digest = rng_digest(rng);
    if (best.empty())
        result.history.best_epoch = train.epochs;
    else
        nn::restore_state(model.state(), best);
    model.set_training(false);
    return result;
}

json history_json(const ClsHistory& h) {
    json epochs = json::array();
    for (const auto& e : h.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"train_bce", e.train_bce},
                          {"train_cce", e.train_cce},
                          {"test_t1_accuracy", optional_json(e.test_t1_accuracy)},
                          {"test_t2_accuracy", optional_json(e.test_t2_accuracy)},
                          {"seconds", e.seconds}});
    return {{"task", "classification"}, {"epochs", epochs}, {"best_epoch", h.best_epoch},
            {"rng_state_digest", h.rng_state_digest}};
}

std::string history_csv(const ClsHistory& h) {
    std::ostringstream s;
    s.precision(10);
    s << "epoch,train_loss,train_bce,train_cce,test_t1_accuracy,test_t2_accuracy,seconds\n";
    for (const auto& e : h.epochs)
        s << e.epoch << ',' << e.train_loss << ',' << e.train_bce << ',' << e.train_cce << ','
          << csv_value(e.test_t1_accuracy) << ',' << csv_value(e.test_t2_accuracy) << ',' << e.seconds << '\n';
    return s.str();
}

// ---- ablation -----------------------------------------------------------

std::vector<AblationRow> run_ablation(const data::Dataset& dataset, const seg::PyramidConfig& base,
                                      const TrainConfig& train, const std::vector<int>& levels,
                                      const std::function<void(int, const SegEpoch&)>& on_epoch) {
    if (levels.empty()) throw ValidationError("run_ablation: no levels requested");
    for (int level : levels)
        if (level < 2 || level > base.n_blocks)
            throw ParameterError("structural level " + std::to_string(level) + " outside [2, " +
                                  std::to_string(base.n_blocks) + "]");
    if (dataset.test.empty()) throw ValidationError("run_ablation: the test split is empty");

    std::vector<AblationRow> rows;
    for (int level : levels) {
        seg::PyramidConfig cfg = base;
        cfg.structural_levels = level;
        SegEpochCallback cb;
        if (on_epoch) cb = [&on_epoch, level](const SegEpoch& e) { on_epoch(level, e); };
        const auto r = train_segmentation(dataset, cfg, train, cb);
        rows.push_back({level, *r.history.best_test_error, r.history.best_epoch});
    }
    return rows;
}

} // namespace mtcd::harness
