#include "dgcnn/commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>

#include "dgcnn/checkpoint.hpp"
#include "dgcnn/config.hpp"
#include "dgcnn/error.hpp"
#include "dgcnn/experiment.hpp"
#include "dgcnn/gradcheck.hpp"
#include "dgcnn/retrieval.hpp"
#include "dgcnn/tu_format.hpp"

namespace dgcnn {

namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Maps library errors onto the exit-code contract.
template <typename Fn>
int guarded(std::ostream& err, const char* command, Fn&& fn) {
    try {
        return fn();
    } catch (const TrainingAborted& e) {
        err << "dgcnn " << command << ": training aborted: " << e.what() << '\n';
        return exit_runtime;
    } catch (const ParseError& e) {
        err << "dgcnn " << command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const ArgumentError& e) {
        err << "dgcnn " << command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const LookupError& e) {
        err << "dgcnn " << command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const ShapeError& e) {
        err << "dgcnn " << command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        err << "dgcnn " << command << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "dgcnn " << command << ": " << e.what() << '\n';
        return exit_runtime;
    }
}

struct LoadedModel {
    Checkpoint checkpoint;
    GraphDataset dataset;
};

// Loads a checkpoint and a TU dataset encoded against the checkpoint's schema.
LoadedModel load_model_and_data(const std::string& checkpoint_path, const std::string& data_path) {
    LoadedModel m;
    m.checkpoint = load_checkpoint(checkpoint_path);
    const auto& ck = m.checkpoint;
    TuOptions opts;
    opts.edge_labels_as_weights = ck.run_config.dataset.edge_labels_as_weights;
    GraphDataset raw = parse_tu_dataset(data_path, infer_tu_name(data_path), opts);

    if (raw.class_count != ck.class_count) {
        throw ArgumentError("schema mismatch: dataset has " + std::to_string(raw.class_count) +
                            " classes, checkpoint expects " + std::to_string(ck.class_count));
    }
    // Map the dataset's class indices onto the checkpoint's by original label value.
    std::vector<std::size_t> remap(raw.class_count);
    for (std::size_t c = 0; c < raw.class_count; ++c) {
        const auto it = std::find(ck.class_values.begin(), ck.class_values.end(), raw.class_values[c]);
        if (it == ck.class_values.end()) {
            throw ArgumentError("schema mismatch: graph label " + std::to_string(raw.class_values[c]) +
                                " is not a class of the checkpoint");
        }
        remap[c] = static_cast<std::size_t>(it - ck.class_values.begin());
    }
    for (auto& g : raw.graphs) g.class_label = remap[g.class_label];
    raw.class_values = ck.class_values;

    try {
        m.dataset = one_hot_encode(raw, ck.node_label_vocabulary);
    } catch (const LookupError& e) {
        throw ArgumentError(std::string("schema mismatch: ") + e.what());
    }
    if (m.dataset.attr_dim != ck.attr_dim) {
        throw ArgumentError("schema mismatch: dataset attr_dim " + std::to_string(m.dataset.attr_dim) +
                            " != checkpoint attr_dim " + std::to_string(ck.attr_dim));
    }
    return m;
}

std::vector<Example> all_examples(const LoadedModel& m, ReceptiveFieldCache& cache, std::size_t threads) {
    std::vector<std::size_t> ids(m.dataset.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return make_examples(m.dataset, ids, m.checkpoint.run_config.preprocess, cache, threads);
}

GradForm parse_form(const std::string& s) {
    if (s == "exact") return GradForm::exact;
    if (s == "printed") return GradForm::printed;
    if (s == "printed_sigma") return GradForm::printed_sigma;
    if (s == "printed_mu") return GradForm::printed_mu;
    throw ArgumentError("unknown gradient form '" + s + "' (expected exact, printed, printed_sigma or printed_mu)");
}

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, "train", [&] {
        if (args.config_path.empty()) throw ArgumentError("--config is required");
        RunConfig cfg = load_run_config(args.config_path);
        if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
        if (!args.data_path.empty()) {
            cfg.dataset.path = args.data_path;
            cfg.dataset.name.clear();
            cfg.dataset.synthetic.reset();
        }
        if (args.seed) cfg.train.seed = *args.seed;
        if (args.threads) cfg.train.threads = *args.threads;
        if (args.no_wall_time) cfg.train.record_wall_time = false;
        if (cfg.output_dir.empty()) throw ArgumentError("config field 'output_dir': required (or pass --out)");
        cfg.validate();

        const fs::path dir = cfg.output_dir;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) throw ArgumentError("cannot create output directory " + dir.string());

        TrainingRun run = run_training(cfg);

        {
            std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
            if (!csv) throw ArgumentError("cannot write " + (dir / "metrics.csv").string());
            write_metrics_csv(csv, run.result.metrics);
        }
        Checkpoint ck;
        ck.run_config = cfg;
        ck.network = run.result.network;
        ck.attr_dim = run.dataset.attr_dim;
        ck.class_count = run.dataset.class_count;
        ck.node_label_vocabulary = run.dataset.node_label_vocabulary;
        ck.class_values = run.dataset.class_values;
        save_checkpoint(dir / "checkpoint.json", ck);

        std::ofstream log(dir / "run.log", std::ios::binary | std::ios::trunc);
        log << "dgcnn train\n"
            << "seed=" << cfg.train.seed << '\n'
            << "threads=" << cfg.train.threads << '\n'
            << "dataset=" << run.dataset.name << " graphs=" << run.dataset.size()
            << " classes=" << run.dataset.class_count << " attr_dim=" << run.dataset.attr_dim << '\n'
            << "split train=" << run.split.train.size() << " validation=" << run.split.validation.size() << '\n'
            << "parameters=" << run.result.network.parameter_count() << '\n'
            << "config=" << run_config_to_json(cfg, -1) << '\n';
        if (!run.result.metrics.empty()) {
            const auto& m = run.result.metrics.back();
            log << "final epoch=" << m.epoch << " mean_loss=" << shortest(m.mean_loss)
                << " train_accuracy=" << shortest(m.train_accuracy);
            if (m.val_accuracy) log << " val_accuracy=" << shortest(*m.val_accuracy);
            log << '\n';
            out << "epochs=" << m.epoch << " train_accuracy=" << shortest(m.train_accuracy);
            if (m.val_accuracy) out << " val_accuracy=" << shortest(*m.val_accuracy);
            out << '\n';
        }
        out << "wrote " << (dir / "metrics.csv").string() << ", " << (dir / "checkpoint.json").string()
            << ", " << (dir / "run.log").string() << '\n';
        return static_cast<int>(exit_ok);
    });
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path, std::size_t threads,
             std::ostream& out, std::ostream& err) {
    return guarded(err, "eval", [&] {
        const LoadedModel m = load_model_and_data(checkpoint_path, data_path);
        ReceptiveFieldCache cache;
        const auto examples = all_examples(m, cache, threads);
        out << "accuracy=" << shortest(evaluate_classification(m.checkpoint.network, examples, threads)) << '\n';
        return static_cast<int>(exit_ok);
    });
}

int cmd_retrieve(const std::string& checkpoint_path, const std::string& data_path, std::size_t query_id,
                 std::size_t k, const std::string& similarity, std::size_t threads, std::ostream& out,
                 std::ostream& err) {
    return guarded(err, "retrieve", [&] {
        const Similarity sim = parse_similarity(similarity);
        const LoadedModel m = load_model_and_data(checkpoint_path, data_path);
        if (query_id >= m.dataset.size()) {
            throw LookupError("unknown query id " + std::to_string(query_id) + " (corpus has " +
                              std::to_string(m.dataset.size()) + " graphs)");
        }
        ReceptiveFieldCache cache;
        const auto examples = all_examples(m, cache, threads);
        const auto features = extract_features(m.checkpoint.network, examples, threads);
        const auto hits = retrieve(query_id, features, k, sim);
        write_retrieval_tsv(out, query_id, hits);
        return static_cast<int>(exit_ok);
    });
}

int cmd_gradcheck(std::uint64_t seed, std::size_t trials, const std::string& form, std::ostream& out,
                  std::ostream& err) {
    return guarded(err, "gradcheck", [&] {
        if (trials < 1) throw ArgumentError("--trials must be >= 1");
        GradCheckOptions opts;
        opts.seed = seed;
        opts.trials = trials;
        opts.form = parse_form(form);
        const auto report = run_gradcheck(opts);
        print_report(out, report, opts);
        bool ok = report.passed();

        if (opts.form == GradForm::exact) {
            // Negative control: the printed mean/std-dev formulas must be rejected.
            GradCheckOptions control = opts;
            control.form = GradForm::printed;
            const auto rep = run_gradcheck(control);
            const bool mu_rejected = !rep.group(ParamGroup::gmm_mean).passed();
            const bool sigma_rejected = !rep.group(ParamGroup::gmm_std_dev).passed();
            out << "control printed formulas: gmm_mu " << (mu_rejected ? "rejected" : "NOT rejected")
                << " (" << rep.group(ParamGroup::gmm_mean).failures << " of "
                << rep.group(ParamGroup::gmm_mean).checked << " partials off), gmm_sigma "
                << (sigma_rejected ? "rejected" : "NOT rejected") << " ("
                << rep.group(ParamGroup::gmm_std_dev).failures << " of "
                << rep.group(ParamGroup::gmm_std_dev).checked << " partials off)\n";
            if (!mu_rejected || !sigma_rejected) {
                err << "dgcnn gradcheck: negative control was not rejected; the oracle is not discriminating\n";
                ok = false;
            }
        }
        if (!report.passed()) {
            err << "dgcnn gradcheck: tolerance exceeded in:";
            for (std::size_t i = 0; i < param_group_count; ++i) {
                if (!report.groups[i].passed()) err << ' ' << to_string(static_cast<ParamGroup>(i));
            }
            err << '\n';
        }
        return static_cast<int>(ok ? exit_ok : exit_check_failed);
    });
}

int cmd_synth(const std::string& kind, std::size_t per_class, std::size_t size_min, std::size_t size_max,
              const std::string& out_dir, std::uint64_t seed, std::ostream& out, std::ostream& err) {
    return guarded(err, "synth", [&] {
        const SyntheticKind k = parse_synthetic_kind(kind);
        if (out_dir.empty()) throw ArgumentError("--out is required");
        const auto ds = generate_synthetic(k, per_class, size_min, size_max, seed);
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir)) throw ArgumentError("cannot create output directory " + out_dir);
        try {
            write_tu_dataset(ds, out_dir, ds.name, false);
        } catch (const Error& e) {
            throw ArgumentError(e.what());
        }
        out << "wrote " << ds.size() << " graphs to " << out_dir << " as " << ds.name << '\n';
        return static_cast<int>(exit_ok);
    });
}

}  // namespace dgcnn
