#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "scratch.hpp"

namespace {

struct Run {
    int code = -1;
    std::string err;
};

Run run_cli(const std::string& args, const testing_util::ScratchDir& dir) {
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("cd '") + dir.path().string() + "' && '" MTCD_CLI_PATH "' " + args +
                            " > stdout.txt 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
}

} // namespace

TEST_CASE("cli exit codes") {
    testing_util::ScratchDir dir("cli");
    CHECK(run_cli("", dir).code == 2);
    CHECK(run_cli("--help", dir).code == 0);
    CHECK(run_cli("frobnicate", dir).code == 2);
    CHECK(run_cli("gen-data", dir).code == 2);
    CHECK(run_cli("gen-data --out d --canvas 12x", dir).code == 2);
    CHECK(run_cli("gen-data --out d --n-per-class 0", dir).code == 2);

    REQUIRE(run_cli("gen-data --out d --n-per-class 2 --canvas 48x64 --test-fraction 0.5", dir).code == 0);
    CHECK(std::filesystem::exists(dir / "d/manifest.json"));
    CHECK(std::filesystem::exists(dir / "d/images"));

    CHECK(run_cli("eval-seg --manifest d/manifest.json", dir).code == 2);
    CHECK(run_cli("eval-seg --manifest nowhere.json --pred-dir p", dir).code == 2);
    CHECK(run_cli("eval-seg --manifest d/manifest.json --pred-dir no_such_dir", dir).code == 2);
    std::filesystem::create_directories(dir / "empty_dir");
    const auto missing = run_cli("eval-seg --manifest d/manifest.json --pred-dir empty_dir", dir);
    CHECK(missing.code == 1);
    CHECK(missing.err.find("missing mask file") != std::string::npos);

    // Ground-truth masks scored against themselves.
    REQUIRE(run_cli("eval-seg --manifest d/manifest.json --split all --pred-dir d/masks --out e.json", dir).code == 0);
    std::ifstream ej(dir / "e.json");
    const auto j = nlohmann::json::parse(ej);
    CHECK(j["error"].get<double>() == 0.0);
    CHECK(j["n"].get<int>() == 6);
    CHECK(j["kind"] == "seg_eval");

    std::ofstream(dir / "bad.json") << "{";
    const auto bad = run_cli("report --history bad.json", dir);
    CHECK(bad.code == 1);
    CHECK(bad.err.find("bad.json") != std::string::npos);
    CHECK(run_cli("report", dir).code == 1);

    std::ofstream(dir / "cfg.json") << "{\"epochs\": \"many\"}";
    CHECK(run_cli("train-seg --manifest d/manifest.json --config cfg.json --out s", dir).code == 1);
    CHECK(run_cli("train-seg --manifest d/manifest.json --epochs 0 --out s", dir).code == 2);
    CHECK(run_cli("ablate --manifest d/manifest.json --levels 1,5 --out a", dir).code == 2);
    CHECK(run_cli("train-cls --manifest d/manifest.json --backbone alexnet --out c", dir).code == 2);
}
