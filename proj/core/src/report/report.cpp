#include "mtcd/report/report.hpp"

#include <cstdio>
#include <fstream>

#include "mtcd/error.hpp"
#include "mtcd/report/plot.hpp"

namespace mtcd::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<double> number(const json& j, const char* key) {
    if (j.contains(key) && j.at(key).is_number()) return j.at(key).get<double>();
    return std::nullopt;
}

std::string percent(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100 * *v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string safe_name(std::string s) {
    for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return s;
}

} // namespace

RunSummary summarize_run(const json& j, const std::string& name) {
    if (!j.is_object()) throw ValidationError(name + ": expected a JSON object");
    RunSummary r;
    r.name = name;
    try {
        const std::string kind = j.value("kind", j.value("task", std::string()));
        if (kind == "segmentation") {
            r.task = kind;
            r.seg_error = number(j, "best_test_seg_error");
            if (j.contains("best_epoch")) r.best_epoch = j.at("best_epoch").get<int>();
            if (j.contains("epochs")) r.epochs = static_cast<int>(j.at("epochs").size());
        } else if (kind == "seg_eval") {
            r.task = "segmentation";
            r.seg_error = number(j, "error");
        } else if (kind == "classification") {
            r.task = kind;
            if (j.contains("best_epoch")) r.best_epoch = j.at("best_epoch").get<int>();
            if (j.contains("epochs")) {
                r.epochs = static_cast<int>(j.at("epochs").size());
                for (const auto& e : j.at("epochs"))
                    if (e.value("epoch", 0) == r.best_epoch.value_or(-1)) {
                        r.t1_accuracy = number(e, "test_t1_accuracy");
                        r.t2_accuracy = number(e, "test_t2_accuracy");
                    }
            }
            if (j.contains("test_eval")) {
                r.t1_accuracy = j.at("test_eval").at("t1").at("accuracy").get<double>();
                r.t2_accuracy = j.at("test_eval").at("t2").at("accuracy").get<double>();
            }
        } else if (kind == "cls_eval") {
            r.task = "classification";
            r.t1_accuracy = j.at("t1").at("accuracy").get<double>();
            r.t2_accuracy = j.at("t2").at("accuracy").get<double>();
        } else {
            throw ValidationError(name + ": not a training history or evaluation file");
        }
        if (j.contains("embedding")) {
            r.features = j.at("embedding").at("features").get<std::vector<std::vector<float>>>();
            r.labels_t1 = j.at("embedding").at("labels_t1").get<std::vector<int>>();
            if (r.features.size() != r.labels_t1.size())
                throw ValidationError(name + ": embedding features and labels differ in length");
        }
    } catch (const json::exception& e) {
        throw ValidationError(name + ": " + e.what());
    }
    if (!r.seg_error && !r.t1_accuracy && !r.t2_accuracy)
        throw ValidationError(name + ": holds no test metrics");
    return r;
}

ReportFiles write_report(const std::vector<RunSummary>& runs, const fs::path& out_dir, const TsneOptions& tsne_options) {
    if (runs.empty()) throw ValidationError("report: no runs given");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    ReportFiles files;
    std::vector<BarGroup> seg_groups, cls_groups;
    double seg_max = 0;
    for (const auto& r : runs) {
        if (r.seg_error) {
            seg_groups.push_back({r.name, {100 * *r.seg_error}});
            seg_max = std::max(seg_max, 100 * *r.seg_error);
        }
        if (r.t1_accuracy || r.t2_accuracy) {
            BarGroup g{r.name, {}};
            g.values.push_back(r.t1_accuracy ? std::optional<double>(100 * *r.t1_accuracy) : std::nullopt);
            g.values.push_back(r.t2_accuracy ? std::optional<double>(100 * *r.t2_accuracy) : std::nullopt);
            cls_groups.push_back(g);
        }
    }
    if (!seg_groups.empty()) {
        const fs::path p = out_dir / "seg_error.png";
        write_png(p, bar_chart("Segmentation error (%)", {"test error %"}, seg_groups, std::max(1.0, seg_max * 1.2)));
        files.written.push_back(p);
    }
    if (!cls_groups.empty()) {
        const fs::path p = out_dir / "cls_accuracy.png";
        write_png(p, bar_chart("Classification accuracy (%)", {"T1 accuracy %", "T2 accuracy %"}, cls_groups, 100));
        files.written.push_back(p);
    }

    for (const auto& r : runs) {
        if (r.features.size() < 4) continue;
        const auto points = tsne(r.features, tsne_options);
        EmbeddingSummary e;
        e.run = r.name;
        e.points = points.size();
        e.silhouette = silhouette(points, r.labels_t1);
        e.plot = out_dir / (safe_name(r.name) + "_tsne.png");
        write_png(e.plot, scatter_plot("T1 embedding: " + r.name, points, r.labels_t1, {"healthy", "unhealthy"}));
        files.written.push_back(e.plot);
        files.embeddings.push_back(e);
    }

    std::string md = "# Run summary\n\n| run | task | test seg error (%) | T1 accuracy (%) | T2 accuracy (%) | best epoch |\n"
                     "|---|---|---|---|---|---|\n";
    json report = {{"runs", json::array()}, {"embeddings", json::array()}};
    for (const auto& r : runs) {
        md += "| " + r.name + " | " + r.task + " | " + percent(r.seg_error) + " | " + percent(r.t1_accuracy) + " | " +
              percent(r.t2_accuracy) + " | " + (r.best_epoch ? std::to_string(*r.best_epoch) : "-") + " |\n";
        report["runs"].push_back({{"name", r.name},
                                  {"task", r.task},
                                  {"seg_error", r.seg_error ? json(*r.seg_error) : json()},
                                  {"t1_accuracy", r.t1_accuracy ? json(*r.t1_accuracy) : json()},
                                  {"t2_accuracy", r.t2_accuracy ? json(*r.t2_accuracy) : json()}});
    }
    if (!files.embeddings.empty()) {
        char meta[200];
        std::snprintf(meta, sizeof meta,
                      "\nEmbeddings: exact t-SNE of standardised pooled classifier features, perplexity %g "
                      "(capped at (n-1)/3), %d iterations, seed %llu.\n\n",
                      tsne_options.perplexity, tsne_options.iterations,
                      static_cast<unsigned long long>(tsne_options.seed));
        md += meta;
        md += "| run | points | T1 silhouette |\n|---|---|---|\n";
        for (const auto& e : files.embeddings) {
            char row[64];
            std::snprintf(row, sizeof row, "%.3f", e.silhouette);
            md += "| " + e.run + " | " + std::to_string(e.points) + " | " + row + " |\n";
            report["embeddings"].push_back({{"run", e.run},
                                            {"points", e.points},
                                            {"silhouette", e.silhouette},
                                            {"plot", e.plot.filename().string()}});
        }
        report["tsne"] = {{"perplexity", tsne_options.perplexity},
                          {"iterations", tsne_options.iterations},
                          {"learning_rate", tsne_options.learning_rate},
                          {"seed", tsne_options.seed}};
    }
    write_text(out_dir / "summary.md", md);
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    files.written.push_back(out_dir / "summary.md");
    files.written.push_back(out_dir / "report.json");
    return files;
}

} // namespace mtcd::report
