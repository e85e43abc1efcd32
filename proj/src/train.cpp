#include "dgcnn/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dgcnn/error.hpp"
#include "dgcnn/parallel.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

void TrainConfig::validate() const {
    for (double r : {rates.gmm_weight, rates.gmm_mean, rates.gmm_std_dev, rates.head}) {
        if (!(r > 0.0)) throw ArgumentError("train.learning_rate must be > 0");
    }
    if (batch_size < 1) throw ArgumentError("train.batch_size must be >= 1");
    if (threads < 1) throw ArgumentError("train.threads must be >= 1");
}

const ReceptiveFieldSet& ReceptiveFieldCache::get(const GraphDataset& dataset, std::size_t graph_id,
                                                  const PreprocessConfig& config) {
    const auto key = std::make_pair(graph_id, config.hash());
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        it = cache_.emplace(key, build_receptive_fields(dataset.graphs.at(graph_id).graph, config, graph_id))
                 .first;
    }
    return it->second;
}

std::vector<const ReceptiveFieldSet*> ReceptiveFieldCache::get_all(const GraphDataset& dataset,
                                                                   std::span<const std::size_t> graph_ids,
                                                                   const PreprocessConfig& config,
                                                                   std::size_t threads) {
    const std::uint64_t h = config.hash();
    std::vector<std::size_t> missing;
    for (std::size_t id : graph_ids) {
        if (!cache_.contains({id, h})) missing.push_back(id);
    }
    std::vector<ReceptiveFieldSet> built(missing.size());
    parallel_for(missing.size(), threads, [&](std::size_t i) {
        built[i] = build_receptive_fields(dataset.graphs.at(missing[i]).graph, config, missing[i]);
    });
    for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(std::make_pair(missing[i], h), std::move(built[i]));
    std::vector<const ReceptiveFieldSet*> out;
    out.reserve(graph_ids.size());
    for (std::size_t id : graph_ids) out.push_back(&cache_.at({id, h}));
    return out;
}

std::vector<Example> make_examples(const GraphDataset& dataset, std::span<const std::size_t> ids,
                                   const PreprocessConfig& preprocess, ReceptiveFieldCache& cache,
                                   std::size_t threads) {
    const auto rfs = cache.get_all(dataset, ids, preprocess, threads);
    std::vector<Example> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({rfs[i], dataset.graphs[ids[i]].class_label});
    return out;
}

std::size_t predict_class(const Network& net, const ReceptiveFieldSet& rf) {
    const auto probs = net_forward(net, rf).probabilities;
    std::size_t best = 0;
    for (std::size_t b = 1; b < probs.size(); ++b) {
        if (probs[b] > probs[best]) best = b;
    }
    return best;
}

double evaluate_classification(const Network& net, std::span<const Example> examples, std::size_t threads) {
    if (examples.empty()) throw ArgumentError("evaluate_classification: empty subset");
    std::vector<char> correct(examples.size(), 0);
    parallel_for(examples.size(), threads, [&](std::size_t i) {
        correct[i] = predict_class(net, *examples[i].fields) == examples[i].label;
    });
    const auto hits = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
    return static_cast<double>(hits) / static_cast<double>(examples.size());
}

TrainResult train(Network network, std::span<const Example> train_set,
                  std::span<const Example> validation_set, const TrainConfig& config) {
    config.validate();
    network.validate();
    TrainResult result{std::move(network), {}};
    if (config.epochs == 0) return result;
    if (train_set.empty()) throw ArgumentError("train: empty training set");

    Network& net = result.network;
    Rng rng(config.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const auto start = std::chrono::steady_clock::now();
    std::vector<double> losses;
    std::vector<NetworkGradient> grads;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const std::size_t n = end - begin;
            losses.assign(n, 0.0);
            grads.resize(n);
            parallel_for(n, config.threads, [&](std::size_t i) {
                const Example& ex = train_set[order[begin + i]];
                const auto fwd = net_forward(net, *ex.fields);
                auto bwd = net_backward(net, fwd, ex.label, config.loss);
                losses[i] = bwd.loss;
                grads[i] = std::move(bwd.grad);
            });
            NetworkGradient total = std::move(grads[0]);
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(losses[i])) {
                    throw TrainingAborted("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                          std::to_string(batch_index));
                }
                loss_sum += losses[i];
                if (i > 0) total += grads[i];
            }
            total *= 1.0 / static_cast<double>(n);
            sgd_apply(net, total, config.rates);
        }

        Metrics m;
        m.epoch = epoch;
        m.mean_loss = loss_sum / static_cast<double>(order.size());
        m.train_accuracy = evaluate_classification(net, train_set, config.threads);
        if (!validation_set.empty()) {
            m.val_accuracy = evaluate_classification(net, validation_set, config.threads);
        }
        if (config.record_wall_time) {
            m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        result.metrics.push_back(m);
    }
    return result;
}

TrainResult train(Network network, const GraphDataset& dataset, const PreprocessConfig& preprocess,
                  const TrainConfig& config, std::span<const std::size_t> train_ids,
                  std::span<const std::size_t> validation_ids, ReceptiveFieldCache& cache) {
    if (dataset.graphs.empty()) throw ArgumentError("train: empty dataset");
    if (network.dgcl.attr_dim != dataset.attr_dim) {
        throw ShapeError("train: network attribute dimension " + std::to_string(network.dgcl.attr_dim) +
                         " != dataset attr_dim " + std::to_string(dataset.attr_dim));
    }
    if (network.class_count() != dataset.class_count) {
        throw ShapeError("train: network class count does not match dataset");
    }
    if (network.key_node_count != preprocess.key_node_count) {
        throw ShapeError("train: network key_node_count does not match preprocess config");
    }
    const auto tr = make_examples(dataset, train_ids, preprocess, cache, config.threads);
    const auto va = make_examples(dataset, validation_ids, preprocess, cache, config.threads);
    return train(std::move(network), tr, va, config);
}

CvResult cross_validate(const GraphDataset& dataset, std::size_t n_folds, const CvConfig& config,
                        std::uint64_t seed) {
    CvResult r;
    if (n_folds == dataset.size()) {
        // Leave-one-out: every graph is its own fold, stratification is moot.
        r.folds.resize(n_folds);
        std::iota(r.folds.begin(), r.folds.end(), std::size_t{0});
    } else {
        r.folds = stratified_folds(dataset, n_folds, seed);
    }
    ReceptiveFieldCache cache;
    for (std::size_t fold = 0; fold < n_folds; ++fold) {
        const Split split = split_by_fold(r.folds, fold);
        const Network fresh = make_network(config.model, dataset.attr_dim, dataset.class_count,
                                           config.preprocess.key_node_count, derive_seed(seed, fold));
        TrainConfig tc = config.train;
        tc.seed = derive_seed(config.train.seed, fold);
        auto trained = train(fresh, dataset, config.preprocess, tc, split.train, {}, cache);
        const auto va = make_examples(dataset, split.validation, config.preprocess, cache, tc.threads);
        r.fold_accuracies.push_back(evaluate_classification(trained.network, va, tc.threads));
    }
    const double n = static_cast<double>(n_folds);
    r.mean = std::accumulate(r.fold_accuracies.begin(), r.fold_accuracies.end(), 0.0) / n;
    double var = 0.0;
    for (double a : r.fold_accuracies) var += (a - r.mean) * (a - r.mean);
    r.std_dev = std::sqrt(var / n);
    return r;
}

void write_metrics_csv(std::ostream& out, std::span<const Metrics> metrics) {
    out << "epoch,mean_loss,train_accuracy,val_accuracy,wall_time_s\n";
    char buf[160];
    for (const auto& m : metrics) {
        char val[32] = "";
        if (m.val_accuracy) std::snprintf(val, sizeof val, "%.17g", *m.val_accuracy);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%s,%.6f\n", m.epoch, m.mean_loss, m.train_accuracy,
                      val, m.wall_time);
        out << buf;
    }
}

}  // namespace dgcnn
