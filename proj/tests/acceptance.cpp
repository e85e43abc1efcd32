// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "dgcnn/config.hpp"
#include "dgcnn/dgcl.hpp"
#include "dgcnn/experiment.hpp"
#include "dgcnn/gmm.hpp"
#include "dgcnn/gradcheck.hpp"
#include "dgcnn/preprocess.hpp"
#include "dgcnn/random.hpp"
#include "dgcnn/retrieval.hpp"
#include "oracle.hpp"

using namespace dgcnn;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const std::string& id, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
    failures += ok ? 0 : 1;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_binary(const std::string& args, std::string* output = nullptr) {
    const std::string cmd = std::string(DGCNN_BINARY) + " " + args + " 2>&1";
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return -1;
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = ::pclose(p);
    if (output) *output = out;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// The desk-scale learning setup.
RunConfig desk_config(std::size_t components = 10) {
    RunConfig cfg;
    cfg.dataset.synthetic = SyntheticSpec{SyntheticKind::cycles_vs_stars, 100, 6, 20, 42};
    cfg.preprocess.key_node_count = 8;
    cfg.preprocess.stride = 1;
    cfg.preprocess.neighborhood_depth = 2;
    cfg.model.filters = 8;
    cfg.model.components = components;
    cfg.model.hidden_dim = 64;
    cfg.train.rates = LearningRates::from_base(0.01);
    cfg.train.epochs = 200;
    cfg.val_fraction = 0.2;
    cfg.train.record_wall_time = false;
    return cfg;
}

void gradient_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out;
    const int code = run_binary("gradcheck --trials 100", &out);
    const double elapsed = seconds_since(t0);

    GradCheckOptions opts;
    opts.trials = 100;
    double worst = 0.0;
    const auto exact = run_gradcheck(opts);
    for (const auto& g : exact.groups) worst = std::max(worst, g.max_rel_error);
    opts.form = GradForm::printed;
    const auto printed = run_gradcheck(opts);
    const bool printed_rejected = !printed.group(ParamGroup::gmm_mean).passed() &&
                                  !printed.group(ParamGroup::gmm_std_dev).passed();
    report(code == 0 && exact.passed() && printed_rejected && elapsed < 60.0, "gradient_oracle",
           "gradcheck --trials 100 exit=" + std::to_string(code) + " in " + fmt(elapsed, 3) +
               "s, worst rel err " + fmt(worst, 3) + ", printed mu/sigma formulas " +
               (printed_rejected ? "rejected" : "NOT rejected"));
}

void gmm_closed_forms() {
    double worst = std::abs(gaussian_eval({1, 0, 1}, 0) - 0.3989422804014327);
    Rng rng(123);
    for (int t = 0; t < 1000; ++t) {
        GmmParams p;
        for (std::size_t i = 0; i < 1 + rng.index(6); ++i)
            p.components.push_back({rng.uniform(-2, 2), rng.uniform(-3, 3), rng.uniform(0.1, 3)});
        const double x = rng.uniform(-3, 3), alpha = rng.uniform(-3, 3), s = rng.uniform(0, 3);
        GmmParams scaled = p;
        for (auto& c : scaled.components) c.weight *= alpha;
        worst = std::max(worst, std::abs(gmm_eval(scaled, x) - alpha * gmm_eval(p, x)));
        const GmmParams one{{p.components[0]}};
        const double mu = one.components[0].mean;
        worst = std::max(worst, std::abs(gmm_eval(one, mu + s) - gmm_eval(one, mu - s)));
        worst = std::max(worst, std::abs(gaussian_eval(one.components[0], mu) -
                                         1.0 / (std::sqrt(2 * std::acos(-1.0)) * one.components[0].std_dev)));
    }
    report(worst <= 1e-12, "gmm_closed_forms", "max deviation " + fmt(worst, 3) + " (tolerance 1e-12)");
}

struct DeskResult {
    TrainingRun run;
    double seconds;
};

DeskResult desk_training(std::size_t components) {
    const auto t0 = std::chrono::steady_clock::now();
    auto run = run_training(desk_config(components));
    return {std::move(run), seconds_since(t0)};
}

void desk_learning(const DeskResult& r) {
    const auto& m = r.run.result.metrics.back();
    const double val = m.val_accuracy.value_or(0.0);
    report(m.train_accuracy >= 0.95 && val >= 0.90 && r.seconds < 120.0, "desk_learning",
           "cycles_vs_stars after " + std::to_string(m.epoch) + " epochs: train " + fmt(m.train_accuracy) +
               " (>= 0.95), held-out " + fmt(val) + " (>= 0.90) on " +
               std::to_string(r.run.split.validation.size()) + " graphs, " + fmt(r.seconds, 3) + "s");
}

void retrieval(DeskResult& r) {
    const auto ids = r.run.all_ids();
    const auto examples = r.run.examples(ids);
    const auto features = extract_features(r.run.result.network, examples);
    std::vector<std::size_t> labels(r.run.dataset.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = r.run.dataset.graphs[i].class_label;
    std::vector<std::size_t> queries = ids;
    Rng rng(2718);
    rng.shuffle(queries);
    queries.resize(50);
    double total = 0.0;
    for (std::size_t q : queries) total += precision_at_k(retrieve(q, features, 10), labels[q], labels, 10);
    const double mean = total / 50.0;
    report(mean >= 0.90, "retrieval", "mean precision@10 over 50 queries " + fmt(mean) + " (>= 0.90)");
}

void component_sweep(const DeskResult& m10) {
    const std::size_t ms[] = {5, 10, 15, 20, 25};
    std::vector<double> acc;
    for (std::size_t m : ms) {
        if (m == 10) {
            acc.push_back(m10.run.result.metrics.back().val_accuracy.value_or(0.0));
            continue;
        }
        acc.push_back(desk_training(m).run.result.metrics.back().val_accuracy.value_or(0.0));
    }
    bool ok = true;
    double best = acc[0];
    std::string detail = "held-out accuracy by m:";
    for (std::size_t i = 0; i < acc.size(); ++i) {
        ok = ok && acc[i] >= best - 0.03;
        best = std::max(best, acc[i]);
        detail += " " + std::to_string(ms[i]) + "=" + fmt(acc[i]);
    }
    report(ok, "component_sweep", detail + " (each within 0.03 of the running best)");
}

double time_forward(std::size_t E, std::size_t m, const std::vector<ReceptiveFieldSet>& fields, std::size_t d) {
    Rng rng(5);
    const auto layer = init_dgcl(E, m, d, rng);
    double best = std::numeric_limits<double>::infinity();
    double sink = 0.0;
    for (int rep = 0; rep < 7; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int pass = 0; pass < 5; ++pass)
            for (const auto& rf : fields) sink += dgcl_forward(layer, rf).output(0, 0);
        best = std::min(best, seconds_since(t0));
    }
    if (sink == 12345.678) std::cout << "";
    return best;
}

void complexity_scaling() {
    const auto ds = generate_synthetic(SyntheticKind::cycles_vs_stars, 100, 6, 20, 42);
    PreprocessConfig pre;
    std::vector<ReceptiveFieldSet> fields;
    for (std::size_t i = 0; i < ds.size(); ++i) fields.push_back(build_receptive_fields(ds.graphs[i].graph, pre, i));
    const double base = time_forward(8, 10, fields, ds.attr_dim);
    const double m2 = time_forward(8, 20, fields, ds.attr_dim);
    const double e2 = time_forward(16, 10, fields, ds.attr_dim);
    const double rm = m2 / base, re = e2 / base;
    report(rm <= 2.5 && re <= 2.5, "complexity_scaling",
           "forward time ratio m 10->20 " + fmt(rm, 3) + ", E 8->16 " + fmt(re, 3) + " (each <= 2.5)");
}

void determinism() {
    const fs::path root = fs::temp_directory_path() / ("dgcnn_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    RunConfig cfg = desk_config();
    std::ofstream(root / "config.json") << run_config_to_json(cfg);
    bool ok = true;
    std::string detail;
    std::string reference_metrics, reference_ckpt;
    for (int threads : {1, 4}) {
        std::string metrics[2], ckpt[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / ("t" + std::to_string(threads) + "_" + std::to_string(rep));
            const int code = run_binary("train --no-wall-time --config " + (root / "config.json").string() +
                                        " --threads " + std::to_string(threads) + " --out " + out.string());
            ok = ok && code == 0;
            metrics[rep] = slurp(out / "metrics.csv");
            ckpt[rep] = slurp(out / "checkpoint.json");
        }
        const bool same = !metrics[0].empty() && metrics[0] == metrics[1] && ckpt[0] == ckpt[1];
        ok = ok && same;
        detail += "threads=" + std::to_string(threads) + (same ? " identical; " : " DIFFER; ");
        if (reference_metrics.empty()) {
            reference_metrics = metrics[0];
            reference_ckpt = ckpt[0];
        } else {
            const bool cross = reference_metrics == metrics[0] && reference_ckpt == ckpt[0];
            detail += std::string("1 vs 4 threads ") + (cross ? "identical" : "DIFFER");
            ok = ok && cross;
        }
    }
    fs::remove_all(root);
    report(ok, "determinism", "metrics.csv and checkpoint.json byte comparison: " + detail);
}

Graph random_graph(Rng& rng, std::size_t n, double p, bool weighted) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::vector<double> weights;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) {
                edges.emplace_back(u, v);
                if (weighted) weights.push_back(rng.uniform(0.5, 2.0));
            }
    std::vector<std::vector<double>> attrs(n);
    for (auto& a : attrs) a = {rng.uniform(), rng.uniform()};
    return Graph(n, edges, weights, {}, attrs);
}

void preprocessing_invariants() {
    Rng rng(8);
    std::size_t checked_entries = 0, violations = 0, relabel_graphs = 0, relabel_failures = 0;
    for (int g = 0; g < 100; ++g) {
        const Graph graph = random_graph(rng, 1 + rng.index(30), rng.uniform(0.05, 0.4), false);
        PreprocessConfig cfg;
        cfg.key_node_count = 5 + rng.index(8);
        cfg.stride = 1 + rng.index(3);
        cfg.neighborhood_depth = 1 + rng.index(3);
        const auto rf = build_receptive_fields(graph, cfg, g);
        if (rf.size() != cfg.key_node_count) ++violations;
        for (const auto& f : rf.fields) {
            if (f.is_pad()) {
                violations += !f.entries.empty();
                continue;
            }
            const auto dist = oracle::hop_distances(graph, *f.key_node);
            violations += f.entries.empty() || f.entries[0].node != *f.key_node || f.entries[0].theta != 0.0;
            for (const auto& e : f.entries) {
                ++checked_entries;
                violations += dist[e.node] > cfg.neighborhood_depth;
            }
        }
    }
    // Relabeling: distinct centralities via weighted degree (simple graphs always repeat a degree).
    while (relabel_graphs < 100) {
        const std::size_t n = 4 + rng.index(20);
        const Graph graph = random_graph(rng, n, 0.3, true);
        std::set<double> scores;
        for (NodeId v = 0; v < n; ++v) scores.insert(graph.weighted_degree(v));
        if (scores.size() != n) continue;
        ++relabel_graphs;
        PreprocessConfig cfg;
        cfg.ranking = Ranking::weighted_degree;
        cfg.key_node_count = 5 + rng.index(5);
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        auto multisets = [](const ReceptiveFieldSet& rf) {
            std::vector<std::multiset<std::pair<double, std::vector<double>>>> out;
            for (const auto& f : rf.fields) {
                out.emplace_back();
                for (const auto& e : f.entries) out.back().insert({e.theta, e.attrs});
            }
            return out;
        };
        relabel_failures += multisets(build_receptive_fields(graph, cfg)) !=
                            multisets(build_receptive_fields(graph.relabeled(perm), cfg));
    }
    report(violations == 0 && relabel_failures == 0, "preprocessing_invariants",
           "100 random graphs, " + std::to_string(checked_entries) + " entries checked against independent hop distances, " +
               std::to_string(violations) + " violations; relabeling preserved fields on " +
               std::to_string(relabel_graphs - relabel_failures) + "/" + std::to_string(relabel_graphs) + " graphs");
}

void tu_cross_validation() {
    const char* path = std::getenv("DGCNN_TU_DATASET");
    if (!path || !*path) {
        std::cout << "SKIP tu_cross_validation: set DGCNN_TU_DATASET to a TU dataset directory" << std::endl;
        return;
    }
    DatasetSpec spec;
    spec.path = path;
    const auto ds = load_dataset(spec);
    std::vector<std::size_t> counts(ds.class_count, 0);
    for (const auto& g : ds.graphs) ++counts[g.class_label];
    const double majority = static_cast<double>(*std::max_element(counts.begin(), counts.end())) / ds.size();
    CvConfig cv;
    cv.preprocess.key_node_count = 8;
    cv.model.hidden_dim = 64;
    cv.train.epochs = 100;
    const auto r = cross_validate(ds, 10, cv, 42);
    report(r.mean >= majority + 0.05, "tu_cross_validation",
           ds.name + " 10-fold accuracy " + fmt(r.mean) + " +- " + fmt(r.std_dev) + " vs majority " + fmt(majority));
}

}  // namespace

int main() {
    try {
        gradient_oracle();
        gmm_closed_forms();
        auto desk = desk_training(10);
        desk_learning(desk);
        retrieval(desk);
        component_sweep(desk);
        complexity_scaling();
        determinism();
        preprocessing_invariants();
        tu_cross_validation();
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
