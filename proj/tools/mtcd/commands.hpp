#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mtcd::cli {

/// Thrown for flag combinations CLI11 cannot check on its own; exits with 2.
struct FlagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training flags shared by train-seg, train-cls and ablate. Empty optionals
/// keep the value from --config or the task defaults.
struct TrainFlags {
    std::string config;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> batch_size;
    std::optional<double> lambda;
    std::optional<std::uint64_t> seed;
    std::optional<int> augment;  // 0 disables, 5 or 10
};

struct GenDataArgs {
    int n_per_class = 10;
    std::string out;
    std::uint64_t seed = 0;
    std::string canvas = "240x320";
    double test_fraction = 0.2;
};

struct SegModelFlags {
    std::string pyramid_config;
    std::optional<int> levels;
};

struct TrainSegArgs {
    std::string manifest;
    std::string out;
    TrainFlags train;
    SegModelFlags model;
};

struct EvalSegArgs {
    std::string ckpt;
    std::string manifest;
    std::string split = "test";
    std::string pred_dir;
    std::string gt_dir;
    std::string save_predictions;
    bool close = false;
    std::string out;
};

struct TrainClsArgs {
    std::string manifest;
    std::string out;
    std::string backbone = "small_scratch";
    std::string pretrained;
    std::string seg_ckpt;
    TrainFlags train;
};

struct EvalClsArgs {
    std::string ckpt;
    std::string manifest;
    std::string split = "test";
    std::string seg_ckpt;
    std::string out;
};

struct AblateArgs {
    std::string manifest;
    std::string out;
    std::vector<int> levels{2, 3, 4, 5};
    TrainFlags train;
    SegModelFlags model;
};

struct InferArgs {
    std::string image;
    std::string seg_ckpt;
    std::string cls_ckpt;
    std::string out;
};

struct ReportArgs {
    std::vector<std::string> history;
    std::string out_dir;
    std::uint64_t seed = 0;
    double perplexity = 30;
};

/// $MTCD_OUTPUT_DIR when set, otherwise ./mtcd_out.
std::filesystem::path default_output_dir();

int gen_data(const GenDataArgs& a);
int train_seg(const TrainSegArgs& a);
int eval_seg(const EvalSegArgs& a);
int train_cls(const TrainClsArgs& a);
int eval_cls(const EvalClsArgs& a);
int ablate(const AblateArgs& a);
int infer(const InferArgs& a);
int report(const ReportArgs& a);

} // namespace mtcd::cli
