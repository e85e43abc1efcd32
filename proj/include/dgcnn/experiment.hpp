#pragma once

#include <vector>

#include "dgcnn/config.hpp"
#include "dgcnn/graph.hpp"
#include "dgcnn/train.hpp"

namespace dgcnn {

// Everything a configured training run produces, kept together so callers
// can evaluate or extract features afterwards without recomputing
// receptive fields.
struct TrainingRun {
    GraphDataset dataset;
    PreprocessConfig preprocess;
    Split split;
    ReceptiveFieldCache cache;
    TrainResult result;

    std::vector<Example> examples(std::span<const std::size_t> ids, std::size_t threads = 1);
    std::vector<std::size_t> all_ids() const;
};

// Loads the dataset, holds out the validation fold, initialises the network
// from train.seed and trains. The shuffling stream is derived from the same
// seed.
TrainingRun run_training(const RunConfig& config);

// Same, on an already loaded dataset.
TrainingRun run_training(const RunConfig& config, GraphDataset dataset);

}  // namespace dgcnn
