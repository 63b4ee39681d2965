// mtcd: synthetic data generation, training, evaluation, inference and
// reporting for the segmentation + multitask classification pipeline.
//
// Exit codes: 0 success, 1 I/O or data error, 2 bad flags.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mtcd/error.hpp"

using namespace mtcd::cli;

namespace {

void add_train_flags(CLI::App* cmd, TrainFlags& t) {
    cmd->add_option("--config", t.config, "Training config JSON (flags below override it)")->check(CLI::ExistingFile);
    cmd->add_option("--epochs", t.epochs, "Number of epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", t.lr, "Adam learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", t.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", t.lambda, "Weight of the T1 loss")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", t.seed, "Seed for initialisation and batch order");
    cmd->add_option("--augment", t.augment, "Augmentation multiplier: 0 (off), 5 or 10")
        ->check(CLI::IsMember({0, 5, 10}));
}

void add_model_flags(CLI::App* cmd, SegModelFlags& m) {
    cmd->add_option("--pyramid-config", m.pyramid_config, "Segmentation network config JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--levels", m.levels, "Structural pyramid levels to fuse")->check(CLI::Range(2, 64));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MTCD: pyramid-fusion iris/pupil segmentation and multitask cataract classification"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every command");

    GenDataArgs gen;
    auto* c_gen = app.add_subcommand("gen-data", "Write a synthetic NIR eye corpus with masks and labels");
    c_gen->add_option("--n-per-class", gen.n_per_class, "Images per class")->check(CLI::PositiveNumber);
    c_gen->add_option("--out", gen.out, "Output directory")->required();
    c_gen->add_option("--seed", gen.seed, "Corpus seed");
    c_gen->add_option("--canvas", gen.canvas, "Image size as HEIGHTxWIDTH");
    c_gen->add_option("--test-fraction", gen.test_fraction, "Per-class share held out for testing")
        ->check(CLI::Range(0.0, 0.99));

    TrainSegArgs tseg;
    auto* c_tseg = app.add_subcommand("train-seg", "Train the segmentation network");
    c_tseg->add_option("--manifest", tseg.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    c_tseg->add_option("--out", tseg.out, "Output directory (default $MTCD_OUTPUT_DIR or ./mtcd_out)");
    add_train_flags(c_tseg, tseg.train);
    add_model_flags(c_tseg, tseg.model);

    EvalSegArgs eseg;
    auto* c_eseg = app.add_subcommand("eval-seg", "Segmentation error of a checkpoint or of saved predictions");
    c_eseg->add_option("--ckpt", eseg.ckpt, "Segmentation checkpoint (.json)")->check(CLI::ExistingFile);
    c_eseg->add_option("--manifest", eseg.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    c_eseg->add_option("--split", eseg.split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
    c_eseg->add_option("--pred-dir", eseg.pred_dir, "Score masks <sample id>.png from this directory instead")
        ->check(CLI::ExistingDirectory);
    c_eseg->add_option("--gt-dir", eseg.gt_dir, "Read ground truth <sample id>.png from this directory")
        ->check(CLI::ExistingDirectory);
    c_eseg->add_option("--save-predictions", eseg.save_predictions, "Write predicted masks here");
    c_eseg->add_flag("--close", eseg.close, "Apply morphological closing to predictions first");
    c_eseg->add_option("--out", eseg.out, "Result JSON (default <output dir>/seg_eval.json)");

    TrainClsArgs tcls;
    auto* c_tcls = app.add_subcommand("train-cls", "Train the multitask classifier on ROIs");
    c_tcls->add_option("--manifest", tcls.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    c_tcls->add_option("--out", tcls.out, "Output directory (default $MTCD_OUTPUT_DIR or ./mtcd_out)");
    c_tcls->add_option("--backbone", tcls.backbone, "Backbone")
        ->check(CLI::IsMember({"small_scratch", "resnet50_style", "vgg16_style", "inception_style",
                               "densenet121_style"}));
    c_tcls->add_option("--pretrained", tcls.pretrained, "Weights blob for the backbone")->check(CLI::ExistingFile);
    c_tcls->add_option("--seg-ckpt", tcls.seg_ckpt, "Cut ROIs from this model's masks instead of ground truth")
        ->check(CLI::ExistingFile);
    add_train_flags(c_tcls, tcls.train);

    EvalClsArgs ecls;
    auto* c_ecls = app.add_subcommand("eval-cls", "Accuracy, precision, recall, F1 and confusion of a classifier");
    c_ecls->add_option("--ckpt", ecls.ckpt, "Classifier checkpoint (.json)")->required()->check(CLI::ExistingFile);
    c_ecls->add_option("--manifest", ecls.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    c_ecls->add_option("--split", ecls.split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
    c_ecls->add_option("--seg-ckpt", ecls.seg_ckpt, "Cut ROIs from this model's masks instead of ground truth")
        ->check(CLI::ExistingFile);
    c_ecls->add_option("--out", ecls.out, "Result JSON (default <output dir>/cls_eval.json)");

    AblateArgs abl;
    auto* c_abl = app.add_subcommand("ablate", "Train one segmentation model per structural level");
    c_abl->add_option("--manifest", abl.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    c_abl->add_option("--out", abl.out, "Output directory (default $MTCD_OUTPUT_DIR or ./mtcd_out)");
    c_abl->add_option("--levels", abl.levels, "Comma-separated structural levels to train")->delimiter(',');
    add_train_flags(c_abl, abl.train);
    c_abl->add_option("--pyramid-config", abl.model.pyramid_config, "Segmentation network config JSON")
        ->check(CLI::ExistingFile);

    InferArgs inf;
    auto* c_inf = app.add_subcommand("infer", "Segment, post-process and classify one image");
    c_inf->add_option("--image", inf.image, "Eye image (PNG)")->required()->check(CLI::ExistingFile);
    c_inf->add_option("--seg-ckpt", inf.seg_ckpt, "Segmentation checkpoint")->required()->check(CLI::ExistingFile);
    c_inf->add_option("--cls-ckpt", inf.cls_ckpt, "Classifier checkpoint")->required()->check(CLI::ExistingFile);
    c_inf->add_option("--out", inf.out, "Directory for mask.png, roi.png and result.json");

    ReportArgs rep;
    auto* c_rep = app.add_subcommand("report", "Plots and a markdown summary from histories and evaluations");
    c_rep->add_option("--history", rep.history, "History or evaluation JSON files");
    c_rep->add_option("--out-dir", rep.out_dir, "Output directory (default $MTCD_OUTPUT_DIR or ./mtcd_out)");
    c_rep->add_option("--seed", rep.seed, "t-SNE seed");
    c_rep->add_option("--perplexity", rep.perplexity, "t-SNE perplexity")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        const auto parsed = app.get_subcommands();
        std::cerr << "\n" << (parsed.empty() ? app.help() : parsed.front()->help());
        return 2;
    }

    try {
        if (*c_gen) return gen_data(gen);
        if (*c_tseg) return train_seg(tseg);
        if (*c_eseg) return eval_seg(eseg);
        if (*c_tcls) return train_cls(tcls);
        if (*c_ecls) return eval_cls(ecls);
        if (*c_abl) return ablate(abl);
        if (*c_inf) return infer(inf);
        if (*c_rep) return report(rep);
    } catch (const FlagError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mtcd::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
