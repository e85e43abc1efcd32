#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgcnn/graph.hpp"

namespace dgcnn {

enum class Ranking { degree, weighted_degree };
enum class ThetaRule { inverse_hop, edge_weight };

Ranking parse_ranking(const std::string& s);
ThetaRule parse_theta_rule(const std::string& s);
std::string to_string(Ranking r);
std::string to_string(ThetaRule t);

struct PreprocessConfig {
    std::size_t key_node_count = 8;      // w
    std::size_t stride = 1;              // s
    std::size_t neighborhood_depth = 2;  // k, in hops
    Ranking ranking = Ranking::degree;
    ThetaRule theta_rule = ThetaRule::inverse_hop;

    void validate() const;
    // Stable 64-bit fingerprint, used to key receptive-field caches.
    std::uint64_t hash() const;
    bool operator==(const PreprocessConfig&) const = default;
};

struct NeighborhoodEntry {
    NodeId node;
    double theta;
    std::vector<double> attrs;

    bool operator==(const NeighborhoodEntry&) const = default;
};

// A key node with every node within k hops. An absent key marks a pad field,
// which has no entries and contributes only the filter bias downstream.
struct Neighborhood {
    std::optional<NodeId> key_node;
    std::vector<NeighborhoodEntry> entries;

    bool is_pad() const { return !key_node.has_value(); }
    std::size_t size() const { return entries.size(); }
    bool operator==(const Neighborhood&) const = default;
};

struct ReceptiveFieldSet {
    std::vector<Neighborhood> fields;
    std::size_t source_graph_id = 0;

    std::size_t size() const { return fields.size(); }
    bool operator==(const ReceptiveFieldSet&) const = default;
};

// Descending centrality, ties by ascending node index.
std::vector<NodeId> rank_nodes(const Graph& graph, Ranking ranking);

// ranked[0], ranked[s], ranked[2s], ... padded with nullopt up to w entries.
std::vector<std::optional<NodeId>> select_key_nodes(std::span<const NodeId> ranked, std::size_t w,
                                                    std::size_t stride);

// BFS out to config.neighborhood_depth hops. Entries are ordered by
// (hop, node index); the key comes first with theta 0.
Neighborhood assemble_neighborhood(const Graph& graph, std::optional<NodeId> key,
                                   const PreprocessConfig& config);

ReceptiveFieldSet build_receptive_fields(const Graph& graph, const PreprocessConfig& config,
                                         std::size_t graph_id = 0);

// Versioned text cache of receptive fields. Layout:
//   dgcnn-rf 1
//   <graph-count> <w> <attr-dim> <config-hash>
//   per graph:  graph <source-id>
//   per field:  field <key|-1> <entry-count>
//   per entry:  <node> <theta> <attr_0> ... <attr_{d-1}>
// Reals are written with 17 significant digits.
void write_receptive_field_cache(const std::filesystem::path& path,
                                 std::span<const ReceptiveFieldSet> sets, std::size_t attr_dim,
                                 const PreprocessConfig& config);
std::vector<ReceptiveFieldSet> read_receptive_field_cache(const std::filesystem::path& path,
                                                          const PreprocessConfig& config);

}  // namespace dgcnn
