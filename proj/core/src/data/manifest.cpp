#include "mtcd/data/manifest.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "mtcd/image_io.hpp"

namespace mtcd::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr Condition kConditions[] = {Condition::healthy, Condition::pre_cataract, Condition::post_cataract};

std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ValidationError("unknown split '" + s + "'");
}

int test_count(const CorpusOptions& o) {
    return static_cast<int>(std::lround(o.test_fraction * o.n_per_class));
}

void check(const CorpusOptions& o) {
    if (o.n_per_class < 1) throw ParameterError("n_per_class must be at least 1");
    if (!(o.test_fraction >= 0 && o.test_fraction < 1)) throw ParameterError("test_fraction must lie in [0, 1)");
}

std::string sample_name(Condition c, int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", index);
    return to_string(c) + "_" + buf;
}

} // namespace

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open manifest " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw LoadError("malformed manifest " + path.string() + ": " + e.what());
    }
    DatasetManifest m;
    try {
        m.root = j.value("root", std::string("."));
        if (m.root.is_relative()) m.root = path.parent_path() / m.root;
        for (const auto& e : j.at("entries")) {
            ManifestEntry entry;
            entry.image = e.at("image").get<std::string>();
            if (e.contains("mask") && !e["mask"].is_null()) entry.mask = e["mask"].get<std::string>();
            if (e.contains("label_t1") && !e["label_t1"].is_null())
                entry.label_t1 = t1_from_string(e["label_t1"].get<std::string>());
            if (e.contains("label_t2") && !e["label_t2"].is_null())
                entry.label_t2 = t2_from_string(e["label_t2"].get<std::string>());
            entry.split = split_from_string(e.at("split").get<std::string>());
            m.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw LoadError("malformed manifest " + path.string() + ": " + e.what());
    }
    return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        json je = {{"image", e.image}, {"split", split_name(e.split)}};
        if (e.mask) je["mask"] = *e.mask;
        if (e.label_t1) je["label_t1"] = to_string(*e.label_t1);
        if (e.label_t2) je["label_t2"] = to_string(*e.label_t2);
        entries.push_back(std::move(je));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << json{{"root", m.root.generic_string()}, {"entries", entries}}.dump(2) << '\n';
    if (!out) throw IoError("failed writing manifest " + path.string());
}

Dataset load_manifest(const fs::path& path) {
    const DatasetManifest m = read_manifest(path);
    Dataset d;
    for (const auto& e : m.entries) {
        const fs::path image_path = m.root / e.image;
        if (!fs::exists(image_path)) throw LoadError("missing image file " + image_path.string());
        EyeSample s;
        s.sample_id = fs::path(e.image).stem().string();
        s.image = read_png(image_path);
        if (e.mask) {
            const fs::path mask_path = m.root / *e.mask;
            if (!fs::exists(mask_path)) throw LoadError("missing mask file " + mask_path.string());
            s.mask = read_mask_png(mask_path);
        }
        s.label_t1 = e.label_t1;
        s.label_t2 = e.label_t2;
        s.validate();
        if (!s.label_t1 && s.label_t2) s.label_t1 = implied_t1(*s.label_t2);
        (e.split == Split::train ? d.train : d.test).push_back(std::move(s));
    }
    return d;
}

EyeGenParams corpus_params(const CorpusOptions& o, Condition condition, int index) {
    // One independent stream per (class, index) so that the corpus size does
    // not change earlier samples.
    std::seed_seq seq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32),
                      static_cast<std::uint32_t>(condition), static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    auto u = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    EyeGenParams p;
    p.canvas_height = o.canvas_height;
    p.canvas_width = o.canvas_width;
    p.condition = condition;
    p.iris_radius_px = static_cast<int>(std::lround(o.canvas_height * u(0.19, 0.27)));
    p.pupil_radius_fraction = u(0.3, 0.5);
    p.dilation_level = u(0, 1);
    p.eyelid_droop = u(0, 0.6);
    p.specular_count = static_cast<int>(u(0, 4));
    p.center_dx = o.canvas_width * u(-0.1, 0.1);
    p.center_dy = o.canvas_height * u(-0.08, 0.08);
    p.rng_seed = rng();
    return p;
}

namespace {

template <typename Emit>
void for_each_sample(const CorpusOptions& o, Emit&& emit) {
    check(o);
    const int n_test = test_count(o);
    for (Condition c : kConditions)
        for (int i = 0; i < o.n_per_class; ++i) {
            EyeSample s = generate_eye(corpus_params(o, c, i));
            s.sample_id = sample_name(c, i);
            emit(std::move(s), i < o.n_per_class - n_test ? Split::train : Split::test);
        }
}

} // namespace

Dataset synthesize_dataset(const CorpusOptions& options) {
    Dataset d;
    for_each_sample(options, [&d](EyeSample s, Split split) {
        (split == Split::train ? d.train : d.test).push_back(std::move(s));
    });
    return d;
}

DatasetManifest build_synthetic_corpus(const CorpusOptions& options, const fs::path& out_dir) {
    check(options);
    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    if (!ec) fs::create_directories(out_dir / "masks", ec);
    if (ec) throw IoError("cannot create corpus directory " + out_dir.string() + ": " + ec.message());

    DatasetManifest m;
    m.root = ".";
    for_each_sample(options, [&](EyeSample s, Split split) {
        ManifestEntry e;
        e.image = "images/" + s.sample_id + ".png";
        e.mask = "masks/" + s.sample_id + ".png";
        e.label_t1 = s.label_t1;
        e.label_t2 = s.label_t2;
        e.split = split;
        write_png(out_dir / e.image, s.image);
        write_mask_png(out_dir / *e.mask, *s.mask);
        m.entries.push_back(std::move(e));
    });
    write_manifest(out_dir / "manifest.json", m);
    return m;
}

} // namespace mtcd::data
