#include "mtcd/harness/train_config.hpp"

#include <fstream>

namespace mtcd::data {

using nlohmann::json;

void to_json(json& j, const AugmentPolicy& p) {
    j = {{"contrast_factors", p.contrast_factors},
         {"flips", p.flips == AugmentPolicy::Flips::horizontal ? "horizontal" : "none"},
         {"multiplier", p.multiplier}};
}

void from_json(const json& j, AugmentPolicy& p) {
    p = AugmentPolicy{};
    if (j.contains("contrast_factors")) {
        const auto f = j.at("contrast_factors").get<std::vector<double>>();
        if (f.size() != 5) throw ParameterError("contrast_factors must hold exactly 5 values");
        std::copy(f.begin(), f.end(), p.contrast_factors.begin());
    }
    if (j.contains("flips")) {
        const auto f = j.at("flips").get<std::string>();
        if (f == "horizontal")
            p.flips = AugmentPolicy::Flips::horizontal;
        else if (f == "none")
            p.flips = AugmentPolicy::Flips::none;
        else
            throw ParameterError("flips must be 'none' or 'horizontal'");
    }
    if (j.contains("multiplier")) p.multiplier = j.at("multiplier").get<int>();
}

} // namespace mtcd::data

namespace mtcd::harness {

using nlohmann::json;

TrainConfig TrainConfig::defaults(Task task) {
    TrainConfig c;
    c.task = task;
    data::AugmentPolicy policy;
    if (task == Task::segmentation) {
        c.epochs = 60;
        c.lr = 1e-3;
        policy.multiplier = 10;
    } else {
        c.epochs = 100;
        c.lr = 1e-5;
        policy.multiplier = 5;
    }
    c.augment = policy;
    return c;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ParameterError("epochs must be at least 1");
    if (!(lr > 0)) throw ParameterError("learning rate must be positive");
    if (batch_size < 1) throw ParameterError("batch_size must be at least 1");
    if (!(lambda >= 0)) throw ParameterError("lambda must be non-negative");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && eps > 0))
        throw ParameterError("Adam moments must lie in [0, 1) and eps must be positive");
    if (augment) augment->validate();
}

void to_json(json& j, const TrainConfig& c) {
    j = {{"task", c.task == Task::segmentation ? "segmentation" : "classification"},
         {"epochs", c.epochs},
         {"optimizer", {{"name", "adam"}, {"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}}},
         {"batch_size", c.batch_size},
         {"lambda", c.lambda},
         {"seed", c.seed},
         {"augment", c.augment ? json(*c.augment) : json()}};
}

void from_json(const json& j, TrainConfig& c) {
    Task task = Task::segmentation;
    if (j.contains("task")) {
        const auto t = j.at("task").get<std::string>();
        if (t == "classification")
            task = Task::classification;
        else if (t != "segmentation")
            throw ParameterError("task must be 'segmentation' or 'classification'");
    }
    c = TrainConfig::defaults(task);
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        if (o.contains("lr")) c.lr = o.at("lr").get<double>();
        if (o.contains("beta1")) c.beta1 = o.at("beta1").get<double>();
        if (o.contains("beta2")) c.beta2 = o.at("beta2").get<double>();
        if (o.contains("eps")) c.eps = o.at("eps").get<double>();
    }
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("augment")) {
        if (j.at("augment").is_null())
            c.augment.reset();
        else
            c.augment = j.at("augment").get<data::AugmentPolicy>();
    }
}

TrainConfig read_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config " + path.string());
    try {
        TrainConfig c = json::parse(in).get<TrainConfig>();
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw LoadError("malformed config " + path.string() + ": " + e.what());
    }
}

} // namespace mtcd::harness
