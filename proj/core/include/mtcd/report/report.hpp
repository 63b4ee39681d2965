#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtcd/report/embedding.hpp"

namespace mtcd::report {

/// Headline numbers of one run, read from a training history or an
/// evaluation file written by the command-line tool.
struct RunSummary {
    std::string name;
    std::string task;  // "segmentation" or "classification"
    std::optional<double> seg_error;
    std::optional<double> t1_accuracy;
    std::optional<double> t2_accuracy;
    std::optional<int> best_epoch;
    std::optional<int> epochs;
    /// Pooled classifier features and T1 labels, when the file carries them.
    std::vector<std::vector<float>> features;
    std::vector<int> labels_t1;
};

/// Throws ValidationError when `j` is neither a history nor an evaluation.
RunSummary summarize_run(const nlohmann::json& j, const std::string& name);

struct EmbeddingSummary {
    std::string run;
    std::size_t points = 0;
    double silhouette = 0;
    std::filesystem::path plot;
};

struct ReportFiles {
    std::vector<std::filesystem::path> written;
    std::vector<EmbeddingSummary> embeddings;
};

/// Writes seg_error.png and/or cls_accuracy.png, one t-SNE scatter per run
/// with features, summary.md and report.json. Nothing is written when `runs`
/// is empty.
ReportFiles write_report(const std::vector<RunSummary>& runs, const std::filesystem::path& out_dir,
                         const TsneOptions& tsne_options = {});

} // namespace mtcd::report
