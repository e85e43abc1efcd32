#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "dgcnn/graph.hpp"
#include "dgcnn/network.hpp"
#include "dgcnn/preprocess.hpp"

namespace dgcnn {

struct TrainConfig {
    LearningRates rates = LearningRates::from_base(0.01);
    std::size_t epochs = 200;
    std::size_t batch_size = 1;
    std::uint64_t seed = 42;
    LossKind loss = LossKind::squared_error;
    std::size_t threads = 1;
    // When false the wall_time column is written as 0 so metrics files of
    // repeated runs compare byte for byte.
    bool record_wall_time = true;

    void validate() const;
};

struct Metrics {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> val_accuracy;
    double wall_time = 0.0;  // seconds since the start of training
};

// Receptive fields per (graph id, preprocess config), computed once.
class ReceptiveFieldCache {
public:
    const ReceptiveFieldSet& get(const GraphDataset& dataset, std::size_t graph_id,
                                 const PreprocessConfig& config);
    // Receptive fields for the given graphs, in order.
    std::vector<const ReceptiveFieldSet*> get_all(const GraphDataset& dataset,
                                                  std::span<const std::size_t> graph_ids,
                                                  const PreprocessConfig& config, std::size_t threads = 1);
    std::size_t size() const { return cache_.size(); }

private:
    std::map<std::pair<std::size_t, std::uint64_t>, ReceptiveFieldSet> cache_;
};

struct Example {
    const ReceptiveFieldSet* fields;
    std::size_t label;
};

struct TrainResult {
    Network network;
    std::vector<Metrics> metrics;
};

// Shuffled mini-batch SGD on the mean batch gradient. Throws TrainingAborted
// naming the epoch and batch if a loss becomes non-finite.
TrainResult train(Network network, std::span<const Example> train_set,
                  std::span<const Example> validation_set, const TrainConfig& config);

// Convenience overload over dataset indices; receptive fields come from (and
// are stored in) `cache`.
TrainResult train(Network network, const GraphDataset& dataset, const PreprocessConfig& preprocess,
                  const TrainConfig& config, std::span<const std::size_t> train_ids,
                  std::span<const std::size_t> validation_ids, ReceptiveFieldCache& cache);

// Index of the largest probability; ties go to the lowest class.
std::size_t predict_class(const Network& net, const ReceptiveFieldSet& rf);

double evaluate_classification(const Network& net, std::span<const Example> examples,
                               std::size_t threads = 1);

std::vector<Example> make_examples(const GraphDataset& dataset, std::span<const std::size_t> ids,
                                   const PreprocessConfig& preprocess, ReceptiveFieldCache& cache,
                                   std::size_t threads = 1);

struct CvConfig {
    PreprocessConfig preprocess;
    ModelConfig model;
    TrainConfig train;
};

struct CvResult {
    double mean = 0.0;
    double std_dev = 0.0;  // population
    std::vector<double> fold_accuracies;
    std::vector<std::size_t> folds;
};

// n_folds == dataset size runs plain leave-one-out instead of stratified folds.
CvResult cross_validate(const GraphDataset& dataset, std::size_t n_folds, const CvConfig& config,
                        std::uint64_t seed);

// epoch,mean_loss,train_accuracy,val_accuracy,wall_time_s
void write_metrics_csv(std::ostream& out, std::span<const Metrics> metrics);

}  // namespace dgcnn
