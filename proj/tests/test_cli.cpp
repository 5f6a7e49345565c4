// End-to-end checks of the CLI binary. The binary path arrives as the first
// positional argument; everything else is forwarded to doctest.

#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "fnet/model_io.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string g_cli;

struct RunResult {
    int exit_code = -1;
    std::string err;
};

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("fnet_cli_test_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path err_file = scratch / "stderr.txt";
    const std::string cmd =
        "\"" + g_cli + "\" " + args + " > /dev/null 2> \"" + err_file.string() + "\"";
    const int rc = std::system(cmd.c_str());
    RunResult out;
    out.exit_code = rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
    std::ifstream in(err_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    out.err = buf.str();
    return out;
}

void write_file(const fs::path& file, const std::string& text) {
    std::ofstream(file) << text;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kCvConfig = R"({
  "seed": 21,
  "data": {
    "planted": {"p": 20, "sizes_a": [5, 5, 5, 5], "shift": 1.2,
                 "noise_sigma": 0.8, "n_per_class": 40}
  },
  "pipeline": "pool",
  "hierarchy": {"sizes": [4]},
  "cv": {"k": 5}
})";

}  // namespace

TEST_CASE("cv subcommand writes a parsable metric report") {
    const fs::path dir = fresh_dir("cv");
    write_file(dir / "cfg.json", kCvConfig);
    const RunResult r =
        run_cli("cv --config " + (dir / "cfg.json").string() + " --out " + (dir / "run").string(),
                dir);
    CHECK(r.exit_code == 0);

    std::ifstream report(dir / "run" / "cv_report.csv");
    REQUIRE(report.good());
    std::string line;
    REQUIRE(std::getline(report, line));
    CHECK(line == "fold,balanced_accuracy,auroc");
    int rows = 0;
    bool saw_mean = false, saw_std = false;
    while (std::getline(report, line)) {
        std::istringstream fields(line);
        std::string fold, acc, auc;
        REQUIRE(std::getline(fields, fold, ','));
        REQUIRE(std::getline(fields, acc, ','));
        REQUIRE(std::getline(fields, auc, ','));
        const double a = std::stod(acc);
        const double u = std::stod(auc);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
        if (fold == "mean") saw_mean = true;
        else if (fold == "std") saw_std = true;
        else ++rows;
    }
    CHECK(rows == 5);
    CHECK(saw_mean);
    CHECK(saw_std);

    const json manifest = json::parse(slurp(dir / "run" / "manifest.json"));
    CHECK(manifest.at("subcommand") == "cv");
    CHECK(manifest.at("seed") == 21);
    CHECK(manifest.at("artifacts").size() == 1);
    CHECK(manifest.at("results").at("pipeline") == "pool");
    fs::remove_all(dir);
}

TEST_CASE("reruns with the same config and seed match byte for byte") {
    const fs::path dir = fresh_dir("determinism");
    write_file(dir / "cfg.json", kCvConfig);
    for (const char* out : {"a", "b"}) {
        const RunResult r = run_cli("cv --config " + (dir / "cfg.json").string() + " --out " +
                                        (dir / out).string(),
                                    dir);
        REQUIRE(r.exit_code == 0);
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        CHECK(slurp(entry.path()) == slurp(dir / "b" / name));
        ++compared;
    }
    CHECK(compared == 1);
    fs::remove_all(dir);
}

TEST_CASE("seed flag overrides the config seed and is echoed back") {
    const fs::path dir = fresh_dir("seed");
    write_file(dir / "cfg.json", kCvConfig);
    const RunResult r = run_cli("cv --config " + (dir / "cfg.json").string() + " --seed 77 --out " +
                                    (dir / "run").string(),
                                dir);
    CHECK(r.exit_code == 0);
    const json manifest = json::parse(slurp(dir / "run" / "manifest.json"));
    CHECK(manifest.at("seed") == 77);
    CHECK(manifest.at("config").at("seed") == 77);
    fs::remove_all(dir);
}

TEST_CASE("config errors exit with status 2 and name the offending field") {
    const fs::path dir = fresh_dir("badcfg");

    SUBCASE("negative sigma") {
        write_file(dir / "cfg.json", R"({
  "data": {"planted": {"p": 10, "sizes_a": [5, 5]}},
  "network": {"source": "gaussian", "sigma": -2.0}
})");
        const RunResult r = run_cli(
            "build-network --config " + (dir / "cfg.json").string() + " --out " +
                (dir / "run").string(),
            dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("network.sigma") != std::string::npos);
    }

    SUBCASE("unknown key") {
        write_file(dir / "cfg.json", R"({
  "data": {"planted": {"p": 10, "sizes_a": [5, 5]}},
  "nettwork": {"sparsify_tau": 0.1}
})");
        const RunResult r = run_cli(
            "build-network --config " + (dir / "cfg.json").string() + " --out " +
                (dir / "run").string(),
            dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("nettwork") != std::string::npos);
    }

    SUBCASE("missing config file") {
        const RunResult r =
            run_cli("cv --config " + (dir / "does_not_exist.json").string(), dir);
        CHECK(r.exit_code == 2);
    }

    fs::remove_all(dir);
}

TEST_CASE("model artifacts round-trip through the library loaders") {
    const fs::path dir = fresh_dir("models");
    write_file(dir / "cfg.json", R"({
  "seed": 5,
  "data": {
    "planted": {"p": 12, "sizes_a": [3, 3, 3, 3], "shift": 1.0,
                 "noise_sigma": 0.6, "n_per_class": 30}
  },
  "hierarchy": {"sizes": [4]},
  "conv": {"alpha": 0.2, "epochs": 40}
})");

    const RunResult smooth = run_cli(
        "smoothness --config " + (dir / "cfg.json").string() + " --out " +
            (dir / "smooth").string(),
        dir);
    REQUIRE(smooth.exit_code == 0);
    const auto classifier =
        fnet::load_smoothness_classifier_file((dir / "smooth" / "smoothness.model").string());
    const int cls = fnet::classify(classifier, fnet::Vector::Zero(12));
    CHECK((cls == 1 || cls == -1));

    const RunResult conv = run_cli(
        "conv-train --config " + (dir / "cfg.json").string() + " --out " + (dir / "conv").string(),
        dir);
    REQUIRE(conv.exit_code == 0);
    const fnet::MaskedConvNet net =
        fnet::load_conv_net_file((dir / "conv" / "conv.model").string());
    CHECK(net.input_dim() == 12);
    CHECK(net.output_dim() == 1);
    fs::remove_all(dir);
}

int main(int argc, char** argv) {
    std::vector<char*> forwarded;
    forwarded.push_back(argv[0]);
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (g_cli.empty() && !arg.empty() && arg[0] != '-') {
            g_cli = arg;
            continue;
        }
        forwarded.push_back(argv[i]);
    }
    doctest::Context context(int(forwarded.size()), forwarded.data());
    return context.run();
}
