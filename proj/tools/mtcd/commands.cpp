#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mtcd/harness/checkpoint.hpp"
#include "mtcd/harness/pipeline.hpp"
#include "mtcd/harness/training.hpp"
#include "mtcd/image_io.hpp"
#include "mtcd/report/report.hpp"

namespace mtcd::cli {

namespace fs = std::filesystem;
using harness::TrainConfig;
using nlohmann::json;

namespace {

fs::path output_dir(const std::string& flag) { return flag.empty() ? default_output_dir() : fs::path(flag); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

TrainConfig resolve_train(const TrainFlags& f, harness::Task task) {
    TrainConfig c = f.config.empty() ? TrainConfig::defaults(task) : harness::read_train_config(f.config);
    c.task = task;
    if (f.epochs) c.epochs = *f.epochs;
    if (f.lr) c.lr = *f.lr;
    if (f.batch_size) c.batch_size = *f.batch_size;
    if (f.lambda) c.lambda = *f.lambda;
    if (f.seed) c.seed = *f.seed;
    if (f.augment) {
        if (*f.augment == 0) {
            c.augment.reset();
        } else {
            data::AugmentPolicy p = c.augment.value_or(data::AugmentPolicy{});
            p.multiplier = *f.augment;
            c.augment = p;
        }
    }
    c.validate();
    return c;
}

seg::PyramidConfig resolve_pyramid(const SegModelFlags& f) {
    seg::PyramidConfig c;
    if (!f.pyramid_config.empty()) {
        std::ifstream in(f.pyramid_config);
        if (!in) throw LoadError("cannot open " + f.pyramid_config);
        try {
            c = json::parse(in).get<seg::PyramidConfig>();
        } catch (const json::exception& e) {
            throw LoadError("malformed pyramid config " + f.pyramid_config + ": " + e.what());
        }
    }
    if (f.levels) c.structural_levels = *f.levels;
    c.validate();
    return c;
}

std::vector<data::EyeSample> select_split(data::Dataset d, const std::string& split) {
    if (split == "train") return std::move(d.train);
    if (split == "test") return std::move(d.test);
    auto all = std::move(d.train);
    for (auto& s : d.test) all.push_back(std::move(s));
    return all;
}

BinaryMask read_named_mask(const fs::path& dir, const std::string& id, int h, int w) {
    const fs::path p = dir / (id + ".png");
    if (!fs::exists(p)) throw LoadError("missing mask file " + p.string());
    BinaryMask m = read_mask_png(p);
    return m.same_shape(h, w) ? m : resize_nearest(m, h, w);
}

/// ROIs cut from ground-truth masks, or from a segmentation model's masks.
std::vector<harness::ClsExample> make_rois(const std::vector<data::EyeSample>& samples, const std::string& seg_ckpt) {
    if (seg_ckpt.empty()) return harness::prepare_classification(samples);
    auto model = harness::load_segmentation<float>(seg_ckpt);
    const auto& pc = model->config();
    std::vector<RealImage> images;
    for (const auto& s : samples) images.push_back(to_unit_range(resize_bilinear(s.image, pc.input_height, pc.input_width)));
    const auto masks = harness::predict_masks(*model, images);
    std::vector<harness::ClsExample> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        s.validate();
        if (!s.label_t2) throw ValidationError("sample " + s.sample_id + " has no T2 label");
        const auto roi = harness::roi_from_mask(s.image, masks[i], StructuringElement{});
        harness::ClsExample e;
        e.roi = roi.roi;
        e.empty_mask = roi.empty_mask;
        e.t2 = static_cast<int>(*s.label_t2);
        e.t1 = static_cast<int>(data::implied_t1(*s.label_t2));
        e.id = s.sample_id;
        out.push_back(std::move(e));
    }
    return out;
}

GrayImage to_gray(const RealImage& img) {
    GrayImage g(img.height(), img.width());
    for (std::size_t k = 0; k < img.size(); ++k)
        g.pixels()[k] = static_cast<std::uint8_t>(std::clamp(std::lround(img.pixels()[k] * 255.0), 0L, 255L));
    return g;
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

void print_task(const char* name, const ClsEvalResult& r) {
    std::printf("%s accuracy %.4f  macro precision %s  recall %s  F1 %s\n", name, r.accuracy,
                fmt_opt(r.macro_precision).c_str(), fmt_opt(r.macro_recall).c_str(), fmt_opt(r.macro_f1).c_str());
    std::printf("  confusion (rows actual, cols predicted):\n");
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        std::printf("  %-14s", r.class_names[i].c_str());
        for (auto v : r.confusion[i]) std::printf(" %5zu", v);
        std::printf("\n");
    }
}

} // namespace

fs::path default_output_dir() {
    if (const char* env = std::getenv("MTCD_OUTPUT_DIR"); env && *env) return env;
    return "mtcd_out";
}

int gen_data(const GenDataArgs& a) {
    data::CorpusOptions o;
    o.n_per_class = a.n_per_class;
    o.seed = a.seed;
    o.test_fraction = a.test_fraction;
    {
        int h = 0, w = 0;
        char x = 0, extra = 0;
        std::istringstream in(a.canvas);
        if (!(in >> h >> x >> w) || (x != 'x' && x != 'X') || (in >> extra) || h < 16 || w < 16)
            throw FlagError("--canvas must look like 240x320 with both sides at least 16");
        o.canvas_height = h;
        o.canvas_width = w;
    }
    const fs::path out = a.out;
    const auto m = data::build_synthetic_corpus(o, out);
    std::map<std::string, int> per_class;
    int train = 0;
    for (const auto& e : m.entries) {
        ++per_class[data::to_string(*e.label_t2)];
        train += e.split == data::Split::train;
    }
    const fs::path manifest = out / "manifest.json";
    std::printf("wrote %zu images (%d train, %zu test)\n", m.entries.size(), train, m.entries.size() - train);
    for (const auto& [name, n] : per_class) std::printf("  %-14s %d\n", name.c_str(), n);
    std::printf("manifest %s\ndigest %s\n", manifest.string().c_str(), file_digest(manifest).c_str());
    return 0;
}

int train_seg(const TrainSegArgs& a) {
    const TrainConfig tc = resolve_train(a.train, harness::Task::segmentation);
    const seg::PyramidConfig pc = resolve_pyramid(a.model);
    const fs::path out = output_dir(a.out);
    const auto dataset = data::load_manifest(a.manifest);
    ensure_dir(out);

    std::printf("training segmentation: %zu train / %zu test images, %d epochs\n", dataset.train.size(),
                dataset.test.size(), tc.epochs);
    auto result = harness::train_segmentation(dataset, pc, tc, [&](const harness::SegEpoch& e) {
        std::printf("epoch %3d/%d  loss %.5f  test error %s  (%.1f s)\n", e.epoch, tc.epochs, e.train_loss,
                    fmt_opt(e.test_error).c_str(), e.seconds);
        std::fflush(stdout);
    });

    const auto& h = result.history;
    json history = harness::history_json(h);
    json losses = json::array(), metrics = json::array();
    for (const auto& e : h.epochs) {
        losses.push_back(e.train_loss);
        metrics.push_back(e.test_error ? json(*e.test_error) : json());
    }
    const fs::path ckpt = out / "seg.json";
    harness::save_checkpoint(ckpt, *result.model,
                             {{"epoch", h.best_epoch},
                              {"train_loss", h.epochs.at(static_cast<std::size_t>(h.best_epoch - 1)).train_loss},
                              {"loss_history", losses},
                              {"metric_history", metrics},
                              {"metric", "test_seg_error"},
                              {"rng_seed", tc.seed},
                              {"rng_state_digest", h.rng_state_digest},
                              {"train_config", tc}});
    history["train_config"] = tc;
    history["pyramid_config"] = pc;
    history["checkpoint"] = ckpt.filename().string();
    write_json(out / "history.json", history);
    write_text(out / "history.csv", harness::history_csv(h));
    std::printf("best epoch %d, test error %s\ncheckpoint %s\n", h.best_epoch, fmt_opt(h.best_test_error).c_str(),
                ckpt.string().c_str());
    return 0;
}

int eval_seg(const EvalSegArgs& a) {
    if (a.ckpt.empty() && a.pred_dir.empty()) throw FlagError("eval-seg needs --ckpt or --pred-dir");
    if (!a.save_predictions.empty() && a.ckpt.empty()) throw FlagError("--save-predictions needs --ckpt");
    std::unique_ptr<seg::PyramidNet<float>> model;
    int h = 224, w = 224;
    if (!a.ckpt.empty()) {
        model = harness::load_segmentation<float>(a.ckpt);
        h = model->config().input_height;
        w = model->config().input_width;
    }
    const auto samples = select_split(data::load_manifest(a.manifest), a.split);
    if (samples.empty()) throw ValidationError("split '" + a.split + "' of " + a.manifest + " is empty");
    auto examples = harness::prepare_segmentation(samples, h, w, a.gt_dir.empty());
    if (!a.gt_dir.empty())
        for (auto& e : examples) e.mask = read_named_mask(a.gt_dir, e.id, h, w);

    std::vector<BinaryMask> pred;
    if (!a.pred_dir.empty()) {
        for (const auto& e : examples) pred.push_back(read_named_mask(a.pred_dir, e.id, h, w));
    } else {
        std::vector<RealImage> images;
        for (const auto& e : examples) images.push_back(e.image);
        pred = harness::predict_masks(*model, images);
    }
    if (a.close)
        for (auto& p : pred) p = close(p);
    if (!a.save_predictions.empty()) {
        ensure_dir(a.save_predictions);
        for (std::size_t i = 0; i < pred.size(); ++i)
            write_mask_png(fs::path(a.save_predictions) / (examples[i].id + ".png"), pred[i]);
    }

    std::vector<BinaryMask> gt;
    for (const auto& e : examples) gt.push_back(e.mask);
    const SegEvalResult r = seg_error(gt, pred);
    json j = r;
    j["kind"] = "seg_eval";
    j["split"] = a.split;
    j["manifest"] = a.manifest;
    j["checkpoint"] = a.ckpt.empty() ? json() : json(a.ckpt);
    j["closed"] = a.close;
    json ids = json::array();
    for (const auto& e : examples) ids.push_back(e.id);
    j["sample_ids"] = ids;
    const fs::path out = a.out.empty() ? default_output_dir() / "seg_eval.json" : fs::path(a.out);
    write_json(out, j);
    std::printf("seg error %.6f over %zu images of %dx%d\nresult %s\n", r.error, r.n, r.m, r.n_cols,
                out.string().c_str());
    return 0;
}

int train_cls(const TrainClsArgs& a) {
    const TrainConfig tc = resolve_train(a.train, harness::Task::classification);
    cls::ClassifierConfig cc;
    cc.backbone = cls::backbone_from_string(a.backbone);
    if (!a.pretrained.empty()) cc.pretrained_weights_path = a.pretrained;
    cc.validate();
    const fs::path out = output_dir(a.out);
    const auto dataset = data::load_manifest(a.manifest);
    const auto train = make_rois(dataset.train, a.seg_ckpt);
    const auto test = make_rois(dataset.test, a.seg_ckpt);
    ensure_dir(out);

    std::printf("training classifier (%s): %zu train / %zu test ROIs, %d epochs\n", a.backbone.c_str(), train.size(),
                test.size(), tc.epochs);
    auto result = harness::train_classifier(train, test, cc, tc, [&](const harness::ClsEpoch& e) {
        std::printf("epoch %3d/%d  loss %.5f (bce %.4f cce %.4f)  test T1 %s  T2 %s  (%.1f s)\n", e.epoch, tc.epochs,
                    e.train_loss, e.train_bce, e.train_cce, fmt_opt(e.test_t1_accuracy).c_str(),
                    fmt_opt(e.test_t2_accuracy).c_str(), e.seconds);
        std::fflush(stdout);
    });

    const auto& h = result.history;
    json losses = json::array(), metrics = json::array();
    for (const auto& e : h.epochs) {
        losses.push_back(e.train_loss);
        metrics.push_back({{"t1", e.test_t1_accuracy ? json(*e.test_t1_accuracy) : json()},
                           {"t2", e.test_t2_accuracy ? json(*e.test_t2_accuracy) : json()}});
    }
    const fs::path ckpt = out / "cls.json";
    harness::save_checkpoint(ckpt, *result.model,
                             {{"epoch", h.best_epoch},
                              {"train_loss", h.epochs.at(static_cast<std::size_t>(h.best_epoch - 1)).train_loss},
                              {"loss_history", losses},
                              {"metric_history", metrics},
                              {"metric", "test_accuracy"},
                              {"lambda", tc.lambda},
                              {"rng_seed", tc.seed},
                              {"rng_state_digest", h.rng_state_digest},
                              {"train_config", tc}});
    json history = harness::history_json(h);
    history["train_config"] = tc;
    history["classifier_config"] = cc;
    history["checkpoint"] = ckpt.filename().string();
    if (result.test_eval) history["test_eval"] = *result.test_eval;
    write_json(out / "history.json", history);
    write_text(out / "history.csv", harness::history_csv(h));
    std::printf("best epoch %d\n", h.best_epoch);
    if (result.test_eval) {
        print_task("T1", result.test_eval->t1);
        print_task("T2", result.test_eval->t2);
    }
    std::printf("checkpoint %s\n", ckpt.string().c_str());
    return 0;
}

int eval_cls(const EvalClsArgs& a) {
    auto model = harness::load_classifier<float>(a.ckpt);
    const auto samples = select_split(data::load_manifest(a.manifest), a.split);
    if (samples.empty()) throw ValidationError("split '" + a.split + "' of " + a.manifest + " is empty");
    const auto examples = make_rois(samples, a.seg_ckpt);
    harness::ClsPredictions pred;
    const auto ev = harness::evaluate_classifier(*model, examples, &pred);

    json j = ev;
    j["kind"] = "cls_eval";
    j["split"] = a.split;
    j["checkpoint"] = a.ckpt;
    json rows = json::array(), labels1 = json::array(), labels2 = json::array();
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& o = pred.outputs[i];
        rows.push_back({{"id", examples[i].id},
                        {"p_t1", o.p_t1},
                        {"dist_t2", o.dist_t2},
                        {"label_t1", examples[i].t1},
                        {"label_t2", examples[i].t2},
                        {"empty_mask", examples[i].empty_mask}});
        labels1.push_back(examples[i].t1);
        labels2.push_back(examples[i].t2);
    }
    j["samples"] = rows;
    j["embedding"] = {{"features", pred.features}, {"labels_t1", labels1}, {"labels_t2", labels2}};
    const fs::path out = a.out.empty() ? default_output_dir() / "cls_eval.json" : fs::path(a.out);
    write_json(out, j);
    print_task("T1", ev.t1);
    print_task("T2", ev.t2);
    std::printf("result %s\n", out.string().c_str());
    return 0;
}

int ablate(const AblateArgs& a) {
    const TrainConfig tc = resolve_train(a.train, harness::Task::segmentation);
    const seg::PyramidConfig pc = resolve_pyramid(a.model);
    for (int level : a.levels)
        if (level < 2 || level > pc.n_blocks)
            throw FlagError("--levels entries must lie in [2, " + std::to_string(pc.n_blocks) + "]");
    const fs::path out = output_dir(a.out);
    const auto dataset = data::load_manifest(a.manifest);
    ensure_dir(out);

    const auto rows = harness::run_ablation(dataset, pc, tc, a.levels, [&](int level, const harness::SegEpoch& e) {
        std::printf("L%d epoch %3d/%d  loss %.5f  test error %s\n", level, e.epoch, tc.epochs, e.train_loss,
                    fmt_opt(e.test_error).c_str());
        std::fflush(stdout);
    });
    json table = json::array();
    std::string csv = "level,seg_error,best_epoch\n";
    std::printf("level  seg error  best epoch\n");
    for (const auto& r : rows) {
        table.push_back({{"level", r.level}, {"seg_error", r.seg_error}, {"best_epoch", r.best_epoch}});
        char line[96];
        std::snprintf(line, sizeof line, "%d,%.10g,%d\n", r.level, r.seg_error, r.best_epoch);
        csv += line;
        std::printf("L%-5d %.6f   %d\n", r.level, r.seg_error, r.best_epoch);
    }
    write_json(out / "ablation.json", {{"kind", "ablation"}, {"rows", table}, {"train_config", tc}, {"pyramid_config", pc}});
    write_text(out / "ablation.csv", csv);
    return 0;
}

int infer(const InferArgs& a) {
    const auto r = harness::run_pipeline(fs::path(a.image), fs::path(a.seg_ckpt), fs::path(a.cls_ckpt));
    const char* t2_names[] = {"pre_cataract", "post_cataract", "others"};
    std::printf("P(unhealthy) %.4f -> %s\n", r.output.p_t1, r.output.predicted_t1() ? "unhealthy" : "healthy");
    std::printf("T2 (pre, post, others) = (%.4f, %.4f, %.4f) -> %s\n", r.output.dist_t2[0], r.output.dist_t2[1],
                r.output.dist_t2[2], t2_names[r.output.predicted_t2()]);
    if (r.empty_mask) std::printf("warning: empty mask, classified a centre crop instead\n");
    const auto& t = r.timings;
    std::printf("time (s): load %.3f  preprocess %.3f  segment %.3f  postprocess %.3f  classify %.3f  total %.3f\n",
                t.load, t.preprocess, t.segment, t.postprocess, t.classify, t.total);

    const fs::path out = output_dir(a.out);
    ensure_dir(out);
    write_mask_png(out / "mask.png", r.mask);
    write_png(out / "roi.png", to_gray(r.roi));
    write_json(out / "result.json",
               {{"image", a.image},
                {"p_t1", r.output.p_t1},
                {"predicted_t1", r.output.predicted_t1() ? "unhealthy" : "healthy"},
                {"dist_t2", r.output.dist_t2},
                {"predicted_t2", t2_names[r.output.predicted_t2()]},
                {"empty_mask", r.empty_mask},
                {"timings", {{"load", t.load},
                             {"preprocess", t.preprocess},
                             {"segment", t.segment},
                             {"postprocess", t.postprocess},
                             {"classify", t.classify},
                             {"total", t.total}}}});
    std::printf("outputs in %s\n", out.string().c_str());
    return 0;
}

int report(const ReportArgs& a) {
    if (a.history.empty()) throw ValidationError("report: no --history files given");
    std::vector<report::RunSummary> runs;
    std::map<std::string, int> seen;
    for (const auto& file : a.history) {
        std::ifstream in(file);
        if (!in) throw LoadError("cannot open " + file);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw LoadError("malformed JSON in " + file + ": " + e.what());
        }
        const fs::path p(file);
        std::string name = p.parent_path().filename().string();
        name = name.empty() ? p.stem().string() : name + "/" + p.stem().string();
        if (seen[name]++) name += "#" + std::to_string(seen[name]);
        try {
            runs.push_back(report::summarize_run(j, name));
        } catch (const ValidationError& e) {
            throw ValidationError(file + ": " + e.what());
        }
    }
    report::TsneOptions opt;
    opt.seed = a.seed;
    opt.perplexity = a.perplexity;
    const auto files = report::write_report(runs, output_dir(a.out_dir), opt);
    for (const auto& e : files.embeddings)
        std::printf("%s: T1 silhouette %.3f over %zu points\n", e.run.c_str(), e.silhouette, e.points);
    for (const auto& f : files.written) std::printf("wrote %s\n", f.string().c_str());
    return 0;
}

} // namespace mtcd::cli
