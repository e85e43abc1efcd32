#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dgcnn {

using NodeId = std::size_t;

struct Neighbor {
    NodeId node;
    double weight;
};

// Undirected simple graph with optional integer node labels, optional real
// node attribute vectors and positive edge weights (1.0 when unweighted).
//
// Construction validates endpoints, rejects self-loops and collapses
// duplicate edges (first occurrence wins, including its weight). The value is
// immutable afterwards.
class Graph {
public:
    Graph() = default;
    Graph(std::size_t node_count,
          std::vector<std::pair<NodeId, NodeId>> edges,
          std::vector<double> edge_weights = {},
          std::vector<long long> node_labels = {},
          std::vector<std::vector<double>> node_attrs = {});

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    // Canonical edges with u < v, in first-seen order.
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    const std::vector<double>& edge_weights() const { return edge_weights_; }
    bool weighted() const { return weighted_; }

    bool has_node_labels() const { return !node_labels_.empty() || node_count_ == 0; }
    const std::vector<long long>& node_labels() const { return node_labels_; }

    bool has_node_attrs() const { return !node_attrs_.empty() && node_count_ > 0; }
    const std::vector<std::vector<double>>& node_attrs() const { return node_attrs_; }
    std::size_t attr_dim() const { return node_attrs_.empty() ? 0 : node_attrs_.front().size(); }

    // Neighbors sorted by ascending node id.
    std::span<const Neighbor> neighbors(NodeId v) const { return adjacency_[v]; }
    std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
    double weighted_degree(NodeId v) const;

    Graph with_node_attrs(std::vector<std::vector<double>> attrs) const;
    Graph with_node_labels(std::vector<long long> labels) const;

    // Same graph with node i renamed to perm[i].
    Graph relabeled(std::span<const NodeId> perm) const;

    bool operator==(const Graph& other) const;

private:
    std::size_t node_count_ = 0;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<double> edge_weights_;
    bool weighted_ = false;
    std::vector<long long> node_labels_;
    std::vector<std::vector<double>> node_attrs_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

struct LabeledGraph {
    Graph graph;
    std::size_t class_label = 0;

    bool operator==(const LabeledGraph&) const = default;
};

struct GraphDataset {
    std::string name;
    std::vector<LabeledGraph> graphs;
    std::size_t class_count = 0;
    std::size_t attr_dim = 0;
    // Original (on-disk) graph label for each contiguous class index.
    std::vector<long long> class_values;
    // Sorted node labels backing the one-hot block; empty until encoded.
    std::vector<long long> node_label_vocabulary;

    std::size_t size() const { return graphs.size(); }
    bool operator==(const GraphDataset&) const = default;
};

// Throws ArgumentError when class labels, class count or attribute
// dimensions are inconsistent.
void validate_dataset(const GraphDataset& dataset);

// Sorted distinct node labels across the dataset.
std::vector<long long> collect_node_labels(const GraphDataset& dataset);

// Replaces node attributes with a one-hot block over the dataset-wide sorted
// label set; attributes already present are appended after the block.
GraphDataset one_hot_encode(const GraphDataset& dataset);

// Same, against a fixed vocabulary (e.g. the one stored with a trained model).
// A label outside the vocabulary raises LookupError.
GraphDataset one_hot_encode(const GraphDataset& dataset, const std::vector<long long>& vocabulary);

enum class SyntheticKind { cycles_vs_stars, two_density };

SyntheticKind parse_synthetic_kind(const std::string& s);
std::string to_string(SyntheticKind kind);

// Class 0 / class 1 graphs alternate (graph 2i is class 0, 2i+1 class 1).
// Nodes are labeled by degree bucket {1, 2, 3} (degree 0 falls into bucket
// 1, degree >= 3 into bucket 3) and one-hot encoded.
GraphDataset generate_synthetic(SyntheticKind kind, std::size_t per_class,
                                std::size_t size_min, std::size_t size_max, std::uint64_t seed);

// Fold index in [0, n_folds) for every graph, stratified by class.
std::vector<std::size_t> stratified_folds(const GraphDataset& dataset, std::size_t n_folds,
                                          std::uint64_t seed);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

Split split_by_fold(std::span<const std::size_t> folds, std::size_t held_out);

}  // namespace dgcnn
