#include "mtcd/harness/pipeline.hpp"

#include <chrono>

#include "mtcd/harness/checkpoint.hpp"
#include "mtcd/image_io.hpp"

namespace mtcd::harness {

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
public:
    /// Seconds since the previous lap (or construction).
    double lap() {
        const auto now = Clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }
    double since_start() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    Clock::time_point start_ = Clock::now();
    Clock::time_point last_ = start_;
};

void run_stages(const GrayImage& image, seg::PyramidNet<float>& segmenter, cls::MultitaskNet<float>& classifier,
                const StructuringElement& se, PipelineResult& r, Stopwatch& clock) {
    const auto& sc = segmenter.config();
    const RealImage input = to_unit_range(resize_bilinear(image, sc.input_height, sc.input_width));
    const auto batch = seg::images_to_tensor<float>({input});
    r.timings.preprocess = clock.lap();

    segmenter.set_training(false);
    r.raw_mask = segmenter.predict_mask(batch).front().mask;
    r.timings.segment = clock.lap();

    r.mask = close(r.raw_mask, se);
    const auto& cc = classifier.config();
    if (cc.input_height != cc.input_width) throw ShapeError("classifier input must be square");
    auto roi = extract_roi(input, r.mask, cc.input_height);
    r.roi = std::move(roi.roi);
    r.empty_mask = roi.empty_mask;
    r.timings.postprocess = clock.lap();

    classifier.set_training(false);
    const auto logits = classifier.forward(seg::images_to_tensor<float>({r.roi}));
    r.output = cls::outputs_from_logits(logits).front();
    r.features.assign(logits.features.data(), logits.features.data() + logits.features.c());
    r.timings.classify = clock.lap();
    r.timings.total = clock.since_start();
}

} // namespace

PipelineResult run_pipeline(const GrayImage& image, seg::PyramidNet<float>& segmenter,
                            cls::MultitaskNet<float>& classifier, const StructuringElement& se) {
    if (image.empty()) throw ValidationError("run_pipeline: empty image");
    PipelineResult r;
    Stopwatch clock;
    run_stages(image, segmenter, classifier, se, r, clock);
    return r;
}

PipelineResult run_pipeline(const std::filesystem::path& image, const std::filesystem::path& seg_checkpoint,
                            const std::filesystem::path& cls_checkpoint, const StructuringElement& se) {
    PipelineResult r;
    Stopwatch clock;
    const GrayImage img = read_png(image);
    auto segmenter = load_segmentation<float>(seg_checkpoint);
    auto classifier = load_classifier<float>(cls_checkpoint);
    r.timings.load = clock.lap();
    run_stages(img, *segmenter, *classifier, se, r, clock);
    return r;
}

} // namespace mtcd::harness
