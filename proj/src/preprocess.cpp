#include "dgcnn/preprocess.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dgcnn/error.hpp"

namespace dgcnn {

Ranking parse_ranking(const std::string& s) {
    if (s == "degree") return Ranking::degree;
    if (s == "weighted_degree") return Ranking::weighted_degree;
    throw ArgumentError("unknown ranking '" + s + "' (expected degree or weighted_degree)");
}

ThetaRule parse_theta_rule(const std::string& s) {
    if (s == "inverse_hop") return ThetaRule::inverse_hop;
    if (s == "edge_weight") return ThetaRule::edge_weight;
    throw ArgumentError("unknown theta_rule '" + s + "' (expected inverse_hop or edge_weight)");
}

std::string to_string(Ranking r) { return r == Ranking::degree ? "degree" : "weighted_degree"; }
std::string to_string(ThetaRule t) { return t == ThetaRule::inverse_hop ? "inverse_hop" : "edge_weight"; }

void PreprocessConfig::validate() const {
    if (key_node_count < 1) throw ArgumentError("preprocess.key_node_count must be >= 1");
    if (stride < 1) throw ArgumentError("preprocess.stride must be >= 1");
    if (neighborhood_depth < 1) throw ArgumentError("preprocess.neighborhood_depth must be >= 1");
}

std::uint64_t PreprocessConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(key_node_count);
    mix(stride);
    mix(neighborhood_depth);
    mix(static_cast<std::uint64_t>(ranking));
    mix(static_cast<std::uint64_t>(theta_rule));
    return h;
}

std::vector<NodeId> rank_nodes(const Graph& graph, Ranking ranking) {
    if (graph.node_count() == 0) throw ArgumentError("rank_nodes: empty graph");
    std::vector<double> score(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        score[v] = ranking == Ranking::degree ? static_cast<double>(graph.degree(v))
                                              : graph.weighted_degree(v);
    }
    std::vector<NodeId> order(graph.node_count());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return score[a] > score[b]; });
    return order;
}

std::vector<std::optional<NodeId>> select_key_nodes(std::span<const NodeId> ranked, std::size_t w,
                                                    std::size_t stride) {
    if (w < 1 || stride < 1) throw ArgumentError("select_key_nodes: w and stride must be >= 1");
    std::vector<std::optional<NodeId>> keys;
    keys.reserve(w);
    for (std::size_t pos = 0; keys.size() < w && pos < ranked.size(); pos += stride) {
        keys.emplace_back(ranked[pos]);
    }
    keys.resize(w, std::nullopt);
    return keys;
}

Neighborhood assemble_neighborhood(const Graph& graph, std::optional<NodeId> key,
                                   const PreprocessConfig& config) {
    Neighborhood nb;
    if (!key) return nb;
    if (*key >= graph.node_count()) {
        throw ArgumentError("assemble_neighborhood: key " + std::to_string(*key) + " out of range");
    }
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> hop(graph.node_count(), unseen);
    std::vector<std::vector<NodeId>> by_hop(1, {*key});
    hop[*key] = 0;
    for (std::size_t depth = 0; depth < config.neighborhood_depth; ++depth) {
        std::vector<NodeId> next;
        for (NodeId u : by_hop[depth]) {
            for (const auto& n : graph.neighbors(u)) {
                if (hop[n.node] == unseen) {
                    hop[n.node] = depth + 1;
                    next.push_back(n.node);
                }
            }
        }
        if (next.empty()) break;
        std::sort(next.begin(), next.end());
        by_hop.push_back(std::move(next));
    }

    const bool has_attrs = graph.has_node_attrs();
    nb.key_node = key;
    for (std::size_t h = 0; h < by_hop.size(); ++h) {
        for (NodeId v : by_hop[h]) {
            double theta = 0.0;
            if (h > 0) {
                theta = 1.0 / static_cast<double>(h);
                if (h == 1 && config.theta_rule == ThetaRule::edge_weight) {
                    const auto adj = graph.neighbors(*key);
                    const auto it = std::lower_bound(
                        adj.begin(), adj.end(), v,
                        [](const Neighbor& a, NodeId id) { return a.node < id; });
                    theta = it->weight;
                }
            }
            nb.entries.push_back({v, theta, has_attrs ? graph.node_attrs()[v] : std::vector<double>{}});
        }
    }
    return nb;
}

ReceptiveFieldSet build_receptive_fields(const Graph& graph, const PreprocessConfig& config,
                                         std::size_t graph_id) {
    config.validate();
    const auto ranked = rank_nodes(graph, config.ranking);
    const auto keys = select_key_nodes(ranked, config.key_node_count, config.stride);
    ReceptiveFieldSet rf;
    rf.source_graph_id = graph_id;
    rf.fields.reserve(keys.size());
    for (const auto& key : keys) rf.fields.push_back(assemble_neighborhood(graph, key, config));
    return rf;
}

namespace {

std::string real17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_receptive_field_cache(const std::filesystem::path& path,
                                 std::span<const ReceptiveFieldSet> sets, std::size_t attr_dim,
                                 const PreprocessConfig& config) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write receptive-field cache " + path.string());
    out << "dgcnn-rf 1\n"
        << sets.size() << ' ' << config.key_node_count << ' ' << attr_dim << ' ' << config.hash() << '\n';
    for (const auto& rf : sets) {
        out << "graph " << rf.source_graph_id << '\n';
        for (const auto& nb : rf.fields) {
            out << "field " << (nb.key_node ? static_cast<long long>(*nb.key_node) : -1LL) << ' '
                << nb.entries.size() << '\n';
            for (const auto& e : nb.entries) {
                if (e.attrs.size() != attr_dim) {
                    throw ShapeError("receptive-field cache: entry attribute dimension mismatch");
                }
                out << e.node << ' ' << real17(e.theta);
                for (double a : e.attrs) out << ' ' << real17(a);
                out << '\n';
            }
        }
    }
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<ReceptiveFieldSet> read_receptive_field_cache(const std::filesystem::path& path,
                                                          const PreprocessConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("missing file: " + path.string());
    const auto bad = [&](const std::string& what) {
        return ParseError("receptive-field cache " + path.string() + ": " + what);
    };
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "dgcnn-rf" || version != 1) throw bad("unsupported header");
    std::size_t count = 0, w = 0, d = 0;
    std::uint64_t hash = 0;
    if (!(in >> count >> w >> d >> hash)) throw bad("truncated header");
    if (hash != config.hash() || w != config.key_node_count) {
        throw bad("written for a different preprocess configuration");
    }
    std::vector<ReceptiveFieldSet> sets(count);
    for (auto& rf : sets) {
        std::string tag;
        if (!(in >> tag >> rf.source_graph_id) || tag != "graph") throw bad("expected 'graph'");
        rf.fields.resize(w);
        for (auto& nb : rf.fields) {
            long long key = 0;
            std::size_t n = 0;
            if (!(in >> tag >> key >> n) || tag != "field") throw bad("expected 'field'");
            if (key >= 0) nb.key_node = static_cast<NodeId>(key);
            nb.entries.resize(n);
            for (auto& e : nb.entries) {
                e.attrs.resize(d);
                if (!(in >> e.node >> e.theta)) throw bad("truncated entry");
                for (double& a : e.attrs) {
                    if (!(in >> a)) throw bad("truncated entry");
                }
            }
        }
    }
    return sets;
}

}  // namespace dgcnn
