#include "mtcd/metrics.hpp"

namespace mtcd {

SegEvalResult seg_error(const std::vector<BinaryMask>& gt, const std::vector<BinaryMask>& pred) {
    if (gt.empty()) throw ValidationError("seg_error: no masks");
    if (gt.size() != pred.size())
        throw ValidationError("seg_error: " + std::to_string(gt.size()) + " ground-truth masks but " +
                              std::to_string(pred.size()) + " predictions");
    SegEvalResult r;
    r.n = gt.size();
    r.m = gt.front().height();
    r.n_cols = gt.front().width();
    const std::uint64_t plane = static_cast<std::uint64_t>(r.m) * static_cast<std::uint64_t>(r.n_cols);
    if (plane == 0) throw ValidationError("seg_error: empty masks");
    for (std::size_t s = 0; s < gt.size(); ++s) {
        if (!gt[s].same_shape(r.m, r.n_cols) || !pred[s].same_shape(r.m, r.n_cols))
            throw ValidationError("seg_error: mask " + std::to_string(s) + " differs in shape");
        require_binary(gt[s], "seg_error ground truth");
        require_binary(pred[s], "seg_error prediction");
        std::uint64_t diff = 0;
        const auto* a = gt[s].data();
        const auto* b = pred[s].data();
        for (std::size_t k = 0; k < plane; ++k) diff += (a[k] ^ b[k]);
        r.disagreeing_pixels += diff;
        r.per_sample_errors.push_back(static_cast<double>(diff) / static_cast<double>(plane));
    }
    r.error = static_cast<double>(r.disagreeing_pixels) / static_cast<double>(plane * r.n);
    return r;
}

ClsEvalResult classification_eval(const std::vector<int>& preds, const std::vector<int>& labels,
                                  std::vector<std::string> class_names) {
    const int k = static_cast<int>(class_names.size());
    if (k < 2) throw ParameterError("classification_eval needs at least two classes");
    if (preds.size() != labels.size())
        throw ValidationError("classification_eval: prediction and label counts differ");
    if (preds.empty()) throw ValidationError("classification_eval: no samples");
    ClsEvalResult r;
    r.class_names = std::move(class_names);
    r.total = preds.size();
    r.confusion.assign(static_cast<std::size_t>(k), std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
    for (std::size_t s = 0; s < preds.size(); ++s) {
        if (labels[s] < 0 || labels[s] >= k || preds[s] < 0 || preds[s] >= k)
            throw ValidationError("class index outside [0, " + std::to_string(k) + ")");
        ++r.confusion[static_cast<std::size_t>(labels[s])][static_cast<std::size_t>(preds[s])];
    }

    std::size_t correct = 0;
    double sum_p = 0, sum_r = 0, sum_f = 0;
    int n_p = 0, n_r = 0, n_f = 0;
    for (int c = 0; c < k; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const std::size_t tp = r.confusion[cu][cu];
        std::size_t row = 0, col = 0;
        for (int o = 0; o < k; ++o) {
            row += r.confusion[cu][static_cast<std::size_t>(o)];
            col += r.confusion[static_cast<std::size_t>(o)][cu];
        }
        correct += tp;
        r.support.push_back(row);
        std::optional<double> p, rc, f;
        if (col > 0) p = static_cast<double>(tp) / static_cast<double>(col);
        if (row > 0) rc = static_cast<double>(tp) / static_cast<double>(row);
        // 2TP / (2TP + FP + FN) equals 2PR / (P + R) whenever both exist.
        const std::size_t denom = row + col;
        if (denom > 0) f = 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        if (p) { sum_p += *p; ++n_p; }
        if (rc) { sum_r += *rc; ++n_r; }
        if (f) { sum_f += *f; ++n_f; }
        r.precision.push_back(p);
        r.recall.push_back(rc);
        r.f1.push_back(f);

        std::vector<std::optional<double>> norm(static_cast<std::size_t>(k));
        if (row > 0)
            for (int o = 0; o < k; ++o)
                norm[static_cast<std::size_t>(o)] =
                    static_cast<double>(r.confusion[cu][static_cast<std::size_t>(o)]) / static_cast<double>(row);
        r.confusion_normalized.push_back(std::move(norm));
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
    if (n_p) r.macro_precision = sum_p / n_p;
    if (n_r) r.macro_recall = sum_r / n_r;
    if (n_f) r.macro_f1 = sum_f / n_f;
    return r;
}

MultitaskEval cls_eval(const std::vector<int>& preds_t1, const std::vector<int>& labels_t1,
                       const std::vector<int>& preds_t2, const std::vector<int>& labels_t2) {
    return {classification_eval(preds_t1, labels_t1, {"healthy", "unhealthy"}),
            classification_eval(preds_t2, labels_t2, {"pre_cataract", "post_cataract", "others"})};
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json opt_list(const std::vector<std::optional<double>>& v) {
    auto j = nlohmann::json::array();
    for (const auto& x : v) j.push_back(opt(x));
    return j;
}

} // namespace

void to_json(nlohmann::json& j, const SegEvalResult& r) {
    j = {{"error", r.error},
         {"n", r.n},
         {"m", r.m},
         {"n_cols", r.n_cols},
         {"disagreeing_pixels", r.disagreeing_pixels},
         {"per_sample_errors", r.per_sample_errors}};
}

void to_json(nlohmann::json& j, const ClsEvalResult& r) {
    auto norm = nlohmann::json::array();
    for (const auto& row : r.confusion_normalized) norm.push_back(opt_list(row));
    j = {{"classes", r.class_names},
         {"total", r.total},
         {"accuracy", r.accuracy},
         {"precision", opt_list(r.precision)},
         {"recall", opt_list(r.recall)},
         {"f1", opt_list(r.f1)},
         {"support", r.support},
         {"macro_precision", opt(r.macro_precision)},
         {"macro_recall", opt(r.macro_recall)},
         {"macro_f1", opt(r.macro_f1)},
         {"confusion", r.confusion},
         {"confusion_normalized", norm}};
}

void to_json(nlohmann::json& j, const MultitaskEval& r) { j = {{"t1", r.t1}, {"t2", r.t2}}; }

} // namespace mtcd
