// dgcnn: train | eval | retrieve | gradcheck | synth

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dgcnn/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Disordered graph convolutional network: training, evaluation, retrieval and gradient checks"};
    app.require_subcommand(1);

    dgcnn::TrainArgs train_args;
    std::uint64_t train_seed = 0;
    std::size_t train_threads = 0;
    auto* train = app.add_subcommand("train", "train a network from a JSON run config");
    train->add_option("--config", train_args.config_path, "run config (JSON)")->required();
    train->add_option("--out", train_args.output_dir, "output directory (overrides output_dir)");
    train->add_option("--data", train_args.data_path, "TU dataset directory (overrides dataset)");
    auto* seed_opt = train->add_option("--seed", train_seed, "training seed (overrides train.seed)");
    auto* threads_opt = train->add_option("--threads", train_threads, "worker threads (overrides train.threads)")
                            ->check(CLI::PositiveNumber);
    train->add_flag("--no-wall-time", train_args.no_wall_time, "write 0 in the wall_time_s column");

    std::string checkpoint, data, similarity = "cosine";
    std::size_t threads = 1;
    auto* eval = app.add_subcommand("eval", "print accuracy of a checkpoint on a TU dataset");
    eval->add_option("--checkpoint", checkpoint)->required();
    eval->add_option("--data", data, "TU dataset directory")->required();
    eval->add_option("--threads", threads)->check(CLI::PositiveNumber);

    std::size_t query = 0, k = 10;
    auto* retrieve = app.add_subcommand("retrieve", "rank graphs by similarity of dense-hidden features");
    retrieve->add_option("--checkpoint", checkpoint)->required();
    retrieve->add_option("--data", data, "TU dataset directory")->required();
    retrieve->add_option("--query", query, "0-based graph id")->required();
    retrieve->add_option("--k", k, "number of results");
    retrieve->add_option("--similarity", similarity, "cosine | euclidean");
    retrieve->add_option("--threads", threads)->check(CLI::PositiveNumber);

    std::uint64_t seed = 1;
    std::size_t trials = 20;
    std::string form = "exact";
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
    gradcheck->add_option("--seed", seed);
    gradcheck->add_option("--trials", trials);
    gradcheck->add_option("--gmm-form", form, "exact | printed | printed_sigma | printed_mu");

    std::string kind = "cycles_vs_stars", out_dir;
    std::size_t per_class = 100, size_min = 6, size_max = 20;
    std::uint64_t synth_seed = 42;
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset in TU format");
    synth->add_option("--kind", kind, "cycles_vs_stars | two_density");
    synth->add_option("--per-class", per_class);
    synth->add_option("--size-min", size_min);
    synth->add_option("--size-max", size_max);
    synth->add_option("--out", out_dir)->required();
    synth->add_option("--seed", synth_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return dgcnn::exit_usage;
    }

    if (*train) {
        if (*seed_opt) train_args.seed = train_seed;
        if (*threads_opt) train_args.threads = train_threads;
        return dgcnn::cmd_train(train_args, std::cout, std::cerr);
    }
    if (*eval) return dgcnn::cmd_eval(checkpoint, data, threads, std::cout, std::cerr);
    if (*retrieve) {
        return dgcnn::cmd_retrieve(checkpoint, data, query, k, similarity, threads, std::cout, std::cerr);
    }
    if (*gradcheck) return dgcnn::cmd_gradcheck(seed, trials, form, std::cout, std::cerr);
    if (*synth) {
        return dgcnn::cmd_synth(kind, per_class, size_min, size_max, out_dir, synth_seed, std::cout, std::cerr);
    }
    return dgcnn::exit_usage;
}
