#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dgcnn/config.hpp"
#include "dgcnn/network.hpp"

namespace dgcnn {

inline constexpr int checkpoint_format_version = 1;

// JSON document. Parameter arrays are stored per layer in the canonical
// order of flatten_parameters; reals use the shortest decimal form that
// parses back to the same double.
struct Checkpoint {
    int format_version = checkpoint_format_version;
    RunConfig run_config;
    Network network;
    std::size_t attr_dim = 0;
    std::size_t class_count = 0;
    std::vector<long long> node_label_vocabulary;
    std::vector<long long> class_values;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws ParseError for missing, truncated or inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgcnn
