#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtcd/data/generator.hpp"

namespace mtcd::data {

enum class Split { train, test };

struct ManifestEntry {
    std::string image;                // relative to the manifest root
    std::optional<std::string> mask;  // likewise
    std::optional<T1Label> label_t1;
    std::optional<T2Label> label_t2;
    Split split = Split::train;
};

/// JSON layout: {"root": dir, "entries": [{"image", "mask"?, "label_t1"?,
/// "label_t2"?, "split"}]}. A relative root is resolved against the directory
/// holding the manifest file.
struct DatasetManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

struct Dataset {
    std::vector<EyeSample> train;
    std::vector<EyeSample> test;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Decodes every entry. Masks are binarised at 128. A missing T1 label is
/// derived from T2. Throws LoadError naming the missing file and
/// ValidationError for contradictory labels or mismatched mask sizes.
Dataset load_manifest(const std::filesystem::path& path);

struct CorpusOptions {
    int n_per_class = 10;
    int canvas_height = 240;
    int canvas_width = 320;
    std::uint64_t seed = 0;
    /// Share of each class held out for testing, rounded to whole images.
    double test_fraction = 0.2;
};

/// Parameters of the i-th image of a class, drawn deterministically from the
/// corpus seed.
EyeGenParams corpus_params(const CorpusOptions& options, Condition condition, int index);

/// Writes images/, masks/ and manifest.json under `out_dir` for the three
/// conditions, with a per-class split. Returns the manifest as written.
DatasetManifest build_synthetic_corpus(const CorpusOptions& options, const std::filesystem::path& out_dir);

/// Same samples in memory, split the same way.
Dataset synthesize_dataset(const CorpusOptions& options);

} // namespace mtcd::data
