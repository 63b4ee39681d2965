#include "mtcd/harness/checkpoint.hpp"

#include <fstream>

#include "mtcd/nn/serialize.hpp"

namespace mtcd::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSegKind = "segmentation";
constexpr const char* kClsKind = "classification";

template <typename T>
void write_pair(const fs::path& path, const nn::StateRegistry<T>& reg, const char* kind, json config,
                const json& extra) {
    if (!path.parent_path().empty()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    const fs::path weights = weights_path_for(path);
    nn::save_weights(weights, reg);
    json j = extra.is_object() ? extra : json::object();
    j["kind"] = kind;
    j["config"] = std::move(config);
    j["scalar"] = sizeof(T) == 4 ? "float32" : "float64";
    j["weights"] = weights.filename().string();
    j["weights_digest"] = nn::weights_digest(reg);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

json expect_kind(const fs::path& path, const char* kind) {
    json j = read_sidecar(path);
    if (j.value("kind", std::string()) != kind)
        throw LoadError(path.string() + " is not a " + kind + " checkpoint");
    if (!j.contains("config")) throw LoadError(path.string() + " has no model config");
    return j;
}

fs::path blob_path(const fs::path& path, const json& j) {
    return path.parent_path() / j.value("weights", weights_path_for(path).filename().string());
}

} // namespace

fs::path weights_path_for(const fs::path& sidecar) {
    fs::path p = sidecar;
    p.replace_extension(".weights");
    return p;
}

json read_sidecar(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

template <typename T>
void save_checkpoint(const fs::path& path, const seg::PyramidNet<T>& model, const json& extra) {
    write_pair(path, model.state(), kSegKind, json(model.config()), extra);
}

template <typename T>
void save_checkpoint(const fs::path& path, const cls::MultitaskNet<T>& model, const json& extra) {
    write_pair(path, model.state(), kClsKind, json(model.config()), extra);
}

template <typename T>
std::unique_ptr<seg::PyramidNet<T>> load_segmentation(const fs::path& path, json* sidecar) {
    json j = expect_kind(path, kSegKind);
    std::unique_ptr<seg::PyramidNet<T>> model;
    try {
        model = std::make_unique<seg::PyramidNet<T>>(j.at("config").get<seg::PyramidConfig>(), 0);
    } catch (const json::exception& e) {
        throw LoadError("incompatible checkpoint " + path.string() + ": " + e.what());
    } catch (const ParameterError& e) {
        throw LoadError("incompatible checkpoint " + path.string() + ": " + e.what());
    }
    nn::load_weights(blob_path(path, j), model->state());
    model->set_training(false);
    if (sidecar) *sidecar = std::move(j);
    return model;
}

template <typename T>
std::unique_ptr<cls::MultitaskNet<T>> load_classifier(const fs::path& path, json* sidecar) {
    json j = expect_kind(path, kClsKind);
    std::unique_ptr<cls::MultitaskNet<T>> model;
    try {
        auto config = j.at("config").get<cls::ClassifierConfig>();
        // The checkpoint already holds the trained backbone.
        config.pretrained_weights_path.reset();
        model = std::make_unique<cls::MultitaskNet<T>>(config, 0);
    } catch (const json::exception& e) {
        throw LoadError("incompatible checkpoint " + path.string() + ": " + e.what());
    } catch (const ParameterError& e) {
        throw LoadError("incompatible checkpoint " + path.string() + ": " + e.what());
    }
    nn::load_weights(blob_path(path, j), model->state());
    model->set_training(false);
    if (sidecar) *sidecar = std::move(j);
    return model;
}

template void save_checkpoint(const fs::path&, const seg::PyramidNet<float>&, const json&);
template void save_checkpoint(const fs::path&, const seg::PyramidNet<double>&, const json&);
template void save_checkpoint(const fs::path&, const cls::MultitaskNet<float>&, const json&);
template void save_checkpoint(const fs::path&, const cls::MultitaskNet<double>&, const json&);
template std::unique_ptr<seg::PyramidNet<float>> load_segmentation(const fs::path&, json*);
template std::unique_ptr<seg::PyramidNet<double>> load_segmentation(const fs::path&, json*);
template std::unique_ptr<cls::MultitaskNet<float>> load_classifier(const fs::path&, json*);
template std::unique_ptr<cls::MultitaskNet<double>> load_classifier(const fs::path&, json*);

} // namespace mtcd::harness
