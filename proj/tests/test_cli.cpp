#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dgcnn/graph.hpp"
#include "dgcnn/tu_format.hpp"

using namespace dgcnn;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;  // stdout and stderr combined
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(DGCNN_BINARY) + " " + args + " 2>&1";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct Workspace {
    fs::path root;
    Workspace() {
        root = fs::temp_directory_path() / ("dgcnn_cli_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string operator/(const std::string& rel) const { return (root / rel).string(); }
    std::string write_config(const std::string& name, const std::string& body) const {
        const auto p = root / name;
        std::ofstream(p) << body;
        return p.string();
    }
};

const char* small_config = R"({
  "dataset": {"synthetic": {"kind": "cycles_vs_stars", "per_class": 10, "size_min": 6, "size_max": 10, "seed": 1}},
  "preprocess": {"key_node_count": 6},
  "model": {"filters": 3, "components": 4, "conv_channels": 3, "hidden_dim": 8},
  "train": {"learning_rate": 0.02, "epochs": 6, "seed": 5}
})";

}  // namespace

TEST_CASE("synth") {
    Workspace ws;
    auto r = cli("synth --kind cycles_vs_stars --per-class 100 --seed 3 --out " + (ws / "a"));
    REQUIRE(r.code == 0);
    const auto ds = parse_tu_dataset(ws / "a", "cycles_vs_stars");
    CHECK(ds.size() == 200);
    REQUIRE(cli("synth --kind cycles_vs_stars --per-class 100 --seed 3 --out " + (ws / "b")).code == 0);
    for (const auto& e : fs::directory_iterator(ws / "a"))
        CHECK(slurp(e.path()) == slurp(fs::path(ws / "b") / e.path().filename()));
    CHECK(cli("synth --kind triangles --out " + (ws / "c")).code == 2);
    std::ofstream(ws / "file") << "x";
    CHECK(cli("synth --kind two_density --per-class 3 --out " + (ws / "file") + "/sub").code == 2);
    CHECK(cli("synth --kind two_density --size-min 3 --out " + (ws / "d")).code == 2);
}

TEST_CASE("train") {
    Workspace ws;
    const auto cfg = ws.write_config("c.json", small_config);
    auto r = cli("train --no-wall-time --config " + cfg + " --out " + (ws / "run1"));
    REQUIRE_MESSAGE(r.code == 0, r.out);
    for (const char* f : {"metrics.csv", "checkpoint.json", "run.log"}) CHECK(fs::exists(fs::path(ws / "run1") / f));
    const std::string metrics = slurp(fs::path(ws / "run1") / "metrics.csv");
    CHECK(count_lines(metrics) == 7);
    CHECK(metrics.rfind("epoch,mean_loss,train_accuracy,val_accuracy,wall_time_s\n", 0) == 0);
    CHECK(slurp(fs::path(ws / "run1") / "run.log").find("seed") != std::string::npos);

    REQUIRE(cli("train --no-wall-time --config " + cfg + " --out " + (ws / "run2")).code == 0);
    CHECK(metrics == slurp(fs::path(ws / "run2") / "metrics.csv"));
    CHECK(slurp(fs::path(ws / "run1") / "checkpoint.json") == slurp(fs::path(ws / "run2") / "checkpoint.json"));

    REQUIRE(cli("train --no-wall-time --threads 3 --config " + cfg + " --out " + (ws / "run3")).code == 0);
    CHECK(metrics == slurp(fs::path(ws / "run3") / "metrics.csv"));

    REQUIRE(cli("train --no-wall-time --seed 6 --config " + cfg + " --out " + (ws / "run4")).code == 0);
    CHECK(metrics != slurp(fs::path(ws / "run4") / "metrics.csv"));
}

TEST_CASE("train errors") {
    Workspace ws;
    auto cfg = ws.write_config("bad.json", R"({"dataset": {"synthetic": {}}, "model": {"sigma_min": 0}})");
    auto r = cli("train --config " + cfg + " --out " + (ws / "x"));
    CHECK(r.code == 2);
    CHECK(r.out.find("model.sigma_min") != std::string::npos);
    CHECK(cli("train --config " + (ws / "nope.json") + " --out " + (ws / "x")).code == 2);
    cfg = ws.write_config("nan.json", R"({
      "dataset": {"synthetic": {"per_class": 5, "size_min": 6, "size_max": 8}},
      "preprocess": {"key_node_count": 6},
      "model": {"filters": 2, "components": 2, "conv_channels": 2, "hidden_dim": 4},
      "train": {"learning_rate": 1e300, "epochs": 5}})");
    r = cli("train --config " + cfg + " --out " + (ws / "nan"));
    CHECK(r.code == 3);
    CHECK(r.out.find("epoch") != std::string::npos);
}

TEST_CASE("eval and retrieve") {
    Workspace ws;
    REQUIRE(cli("synth --kind cycles_vs_stars --per-class 10 --size-min 6 --size-max 10 --seed 1 --out " + (ws / "data")).code == 0);
    const auto cfg = ws.write_config("c.json", small_config);
    REQUIRE(cli("train --config " + cfg + " --data " + (ws / "data") + " --out " + (ws / "run")).code == 0);
    const std::string ckpt = ws / "run/checkpoint.json";

    auto r = cli("eval --checkpoint " + ckpt + " --data " + (ws / "data"));
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("accuracy=", 0) == 0);
    const double acc = std::stod(r.out.substr(9));
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);

    // three-class dataset
    auto three = parse_tu_dataset(ws / "data", "cycles_vs_stars");
    three.class_count = 3;
    three.class_values = {0, 1, 2};
    three.graphs[0].class_label = 2;
    write_tu_dataset(three, ws / "three", "T", false);
    r = cli("eval --checkpoint " + ckpt + " --data " + (ws / "three"));
    CHECK(r.code == 2);
    CHECK(r.out.find("class") != std::string::npos);

    const std::string text = slurp(ckpt);
    std::ofstream(ws / "trunc.json") << text.substr(0, text.size() / 3);
    r = cli("eval --checkpoint " + (ws / "trunc.json") + " --data " + (ws / "data"));
    CHECK(r.code == 2);

    r = cli("retrieve --checkpoint " + ckpt + " --data " + (ws / "data") + " --query 0 --k 5");
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 5);
    CHECK(r.out.rfind("0\t1\t", 0) == 0);
    CHECK(cli("retrieve --checkpoint " + ckpt + " --data " + (ws / "data") + " --query 0 --k 20").code == 2);
    CHECK(cli("retrieve --checkpoint " + ckpt + " --data " + (ws / "data") + " --query 0 --k 19").code == 0);
    CHECK(cli("retrieve --checkpoint " + ckpt + " --data " + (ws / "data") + " --query 99 --k 3").code == 2);

    // duplicate of graph 3 appended as graph 20
    auto dup = three;
    dup.class_count = 2;
    dup.class_values = {0, 1};
    dup.graphs[0].class_label = 0;
    dup.graphs.push_back(dup.graphs[3]);
    write_tu_dataset(dup, ws / "dup", "D", false);
    r = cli("retrieve --checkpoint " + ckpt + " --data " + (ws / "dup") + " --query 20 --k 3");
    REQUIRE(r.code == 0);
    // synthetic graphs of equal size are isomorphic, so graph 3 may share rank 1's score
    std::istringstream rows(r.out);
    std::size_t q, rank, id;
    double score;
    REQUIRE(static_cast<bool>(rows >> q >> rank >> id >> score));
    CHECK(score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(id <= 3);
    CHECK(r.out.find("\t3\t1\n") != std::string::npos);
}

TEST_CASE("gradcheck") {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = cli("gradcheck --trials 1");
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
    CHECK(r.code == 0);
    r = cli("gradcheck --seed 4 --trials 20");
    CHECK(r.code == 0);
    CHECK(r.out.find("gmm_sigma") != std::string::npos);
    r = cli("gradcheck --trials 5 --gmm-form printed_sigma");
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL gmm_sigma") != std::string::npos);
    CHECK(cli("gradcheck --trials 0").code == 2);
}

TEST_CASE("usage errors") {
    CHECK(cli("").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("eval --checkpoint").code == 2);
}
