#include "dgcnn/experiment.hpp"

#include <cmath>
#include <numeric>

#include "dgcnn/random.hpp"

namespace dgcnn {

std::vector<Example> TrainingRun::examples(std::span<const std::size_t> ids, std::size_t threads) {
    return make_examples(dataset, ids, preprocess, cache, threads);
}

std::vector<std::size_t> TrainingRun::all_ids() const {
    std::vector<std::size_t> ids(dataset.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return ids;
}

TrainingRun run_training(const RunConfig& config) { return run_training(config, load_dataset(config.dataset)); }

TrainingRun run_training(const RunConfig& config, GraphDataset dataset) {
    config.validate();
    validate_dataset(dataset);
    TrainingRun run;
    run.dataset = std::move(dataset);
    run.preprocess = config.preprocess;

    if (config.val_fraction > 0.0) {
        const auto n_folds = static_cast<std::size_t>(std::llround(1.0 / config.val_fraction));
        const auto folds = stratified_folds(run.dataset, n_folds, derive_seed(config.train.seed, 2));
        run.split = split_by_fold(folds, 0);
    } else {
        run.split.train = run.all_ids();
    }

    const Network net = make_network(config.model, run.dataset.attr_dim, run.dataset.class_count,
                                     config.preprocess.key_node_count, config.train.seed);
    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.train.seed, 1);
    run.result = train(net, run.dataset, run.preprocess, tc, run.split.train, run.split.validation, run.cache);
    return run;
}

}  // namespace dgcnn
