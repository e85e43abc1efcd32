#pragma once

#include <filesystem>
#include <string>

#include "dgcnn/graph.hpp"

namespace dgcnn {

struct TuOptions {
    // Read {name}_edge_labels.txt as positive edge weights. Off by default:
    // benchmark graphs are treated as unweighted.
    bool edge_labels_as_weights = false;
};

// Reads the multi-file TU text format:
//   {name}_A.txt                one "u, v" pair per line, 1-indexed global node ids
//   {name}_graph_indicator.txt  one 1-indexed graph id per node
//   {name}_graph_labels.txt     one integer label per graph
//   {name}_node_labels.txt      optional, one integer per node
//   {name}_edge_labels.txt      optional, one value per line of _A.txt
//   {name}_node_attributes.txt  optional, comma-separated reals per node
// Graph labels are remapped to [0, B) in ascending order. Node attributes are
// not one-hot encoded here; see one_hot_encode.
GraphDataset parse_tu_dataset(const std::filesystem::path& directory, const std::string& name,
                              const TuOptions& options = {});

// Writes the files above; every undirected edge is emitted in both directions.
void write_tu_dataset(const GraphDataset& dataset, const std::filesystem::path& directory,
                      const std::string& name, bool write_attributes = true);

}  // namespace dgcnn
