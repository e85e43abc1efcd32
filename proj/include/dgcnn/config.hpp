#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dgcnn/graph.hpp"
#include "dgcnn/network.hpp"
#include "dgcnn/preprocess.hpp"
#include "dgcnn/train.hpp"

namespace dgcnn {

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::cycles_vs_stars;
    std::size_t per_class = 100;
    std::size_t size_min = 6;
    std::size_t size_max = 20;
    std::uint64_t seed = 42;
};

struct DatasetSpec {
    // Either a TU directory (`path`, optional `name`) or a synthetic recipe.
    std::string path;
    std::string name;
    bool edge_labels_as_weights = false;
    std::optional<SyntheticSpec> synthetic;
};

// Key tree of the JSON run configuration:
//
//   dataset.path | dataset.name | dataset.edge_labels_as_weights
//   dataset.synthetic.{kind, per_class, size_min, size_max, seed}
//   preprocess.{key_node_count, stride, neighborhood_depth, ranking, theta_rule}
//   model.{filters, components, conv_channels, hidden_dim, sigma_min}
//   train.{learning_rate, learning_rates.{gmm_w, gmm_mu, gmm_sigma, head},
//          epochs, batch_size, seed, loss, threads, record_wall_time,
//          val_fraction}
//   output_dir
//
// Unknown keys are rejected. learning_rates entries override the per-group
// defaults derived from learning_rate (gmm_sigma defaults to a tenth of it).
struct RunConfig {
    DatasetSpec dataset;
    PreprocessConfig preprocess;
    ModelConfig model;
    TrainConfig train;
    // Share held out as one stratified fold of round(1 / val_fraction) folds; 0 disables.
    double val_fraction = 0.2;
    std::string output_dir;

    void validate() const;
};

// Errors are ArgumentError / ParseError naming the offending field.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
// With include_execution false, settings that cannot change results
// (train.threads, output_dir) are left out; checkpoints use this form so
// runs differing only in those settings produce identical files.
std::string run_config_to_json(const RunConfig& config, int indent = 2, bool include_execution = true);

// Loads the dataset the config describes, one-hot encoded.
GraphDataset load_dataset(const DatasetSpec& spec);

// TU dataset name for a directory: the prefix of its single *_A.txt file.
std::string infer_tu_name(const std::filesystem::path& directory);

}  // namespace dgcnn
