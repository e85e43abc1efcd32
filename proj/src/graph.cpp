#include "dgcnn/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "dgcnn/error.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

Graph::Graph(std::size_t node_count,
             std::vector<std::pair<NodeId, NodeId>> edges,
             std::vector<double> edge_weights,
             std::vector<long long> node_labels,
             std::vector<std::vector<double>> node_attrs)
    : node_count_(node_count),
      weighted_(!edge_weights.empty()),
      node_labels_(std::move(node_labels)),
      node_attrs_(std::move(node_attrs)),
      adjacency_(node_count) {
    if (!edge_weights.empty() && edge_weights.size() != edges.size()) {
        throw ArgumentError("graph: edge_weights length " + std::to_string(edge_weights.size()) +
                            " does not match edge count " + std::to_string(edges.size()));
    }
    if (!node_labels_.empty() && node_labels_.size() != node_count_) {
        throw ArgumentError("graph: node_labels length does not match node_count");
    }
    if (!node_attrs_.empty()) {
        if (node_attrs_.size() != node_count_) {
            throw ArgumentError("graph: node_attrs length does not match node_count");
        }
        const std::size_t d = node_attrs_.front().size();
        if (d == 0) {
            throw ArgumentError("graph: node attribute dimension must be >= 1");
        }
        for (const auto& a : node_attrs_) {
            if (a.size() != d) {
                throw ArgumentError("graph: node attribute vectors differ in dimension");
            }
        }
    }

    std::set<std::pair<NodeId, NodeId>> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [u, v] = edges[i];
        if (u >= node_count_ || v >= node_count_) {
            throw ArgumentError("graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                ") has endpoint >= node_count " + std::to_string(node_count_));
        }
        if (u == v) {
            throw ArgumentError("graph: self-loop on node " + std::to_string(u));
        }
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) continue;
        const double w = edge_weights.empty() ? 1.0 : edge_weights[i];
        if (!(w > 0.0)) {
            throw ArgumentError("graph: edge weights must be positive");
        }
        edges_.emplace_back(u, v);
        edge_weights_.push_back(w);
        adjacency_[u].push_back({v, w});
        adjacency_[v].push_back({u, w});
    }
    for (auto& adj : adjacency_) {
        std::sort(adj.begin(), adj.end(),
                  [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }
}

double Graph::weighted_degree(NodeId v) const {
    double s = 0.0;
    for (const auto& n : adjacency_[v]) s += n.weight;
    return s;
}

Graph Graph::with_node_attrs(std::vector<std::vector<double>> attrs) const {
    return Graph(node_count_, edges_, weighted_ ? edge_weights_ : std::vector<double>{},
                 node_labels_, std::move(attrs));
}

Graph Graph::with_node_labels(std::vector<long long> labels) const {
    return Graph(node_count_, edges_, weighted_ ? edge_weights_ : std::vector<double>{},
                 std::move(labels), node_attrs_);
}

Graph Graph::relabeled(std::span<const NodeId> perm) const {
    if (perm.size() != node_count_) {
        throw ArgumentError("graph: permutation length does not match node_count");
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(edges_.size());
    for (const auto& [u, v] : edges_) edges.emplace_back(perm[u], perm[v]);
    std::vector<long long> labels;
    if (!node_labels_.empty()) {
        labels.resize(node_count_);
        for (std::size_t i = 0; i < node_count_; ++i) labels[perm[i]] = node_labels_[i];
    }
    std::vector<std::vector<double>> attrs;
    if (!node_attrs_.empty()) {
        attrs.resize(node_count_);
        for (std::size_t i = 0; i < node_count_; ++i) attrs[perm[i]] = node_attrs_[i];
    }
    return Graph(node_count_, std::move(edges), weighted_ ? edge_weights_ : std::vector<double>{},
                 std::move(labels), std::move(attrs));
}

bool Graph::operator==(const Graph& other) const {
    if (node_count_ != other.node_count_ || node_labels_ != other.node_labels_ ||
        node_attrs_ != other.node_attrs_ || edges_.size() != other.edges_.size()) {
        return false;
    }
    // Edge order is an artifact of input order; compare as weighted sets.
    std::map<std::pair<NodeId, NodeId>, double> a, b;
    for (std::size_t i = 0; i < edges_.size(); ++i) a[edges_[i]] = edge_weights_[i];
    for (std::size_t i = 0; i < other.edges_.size(); ++i) b[other.edges_[i]] = other.edge_weights_[i];
    return a == b;
}

void validate_dataset(const GraphDataset& dataset) {
    if (dataset.class_count < 2) {
        throw ArgumentError("dataset '" + dataset.name + "': class_count must be >= 2");
    }
    for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
        const auto& g = dataset.graphs[i];
        if (g.class_label >= dataset.class_count) {
            throw ArgumentError("dataset '" + dataset.name + "': graph " + std::to_string(i) +
                                " has class label outside [0, class_count)");
        }
        if (g.graph.node_count() > 0 && g.graph.attr_dim() != dataset.attr_dim) {
            throw ArgumentError("dataset '" + dataset.name + "': graph " + std::to_string(i) +
                                " attribute dimension " + std::to_string(g.graph.attr_dim()) +
                                " != attr_dim " + std::to_string(dataset.attr_dim));
        }
    }
}

std::vector<long long> collect_node_labels(const GraphDataset& dataset) {
    std::set<long long> labels;
    for (const auto& g : dataset.graphs) {
        if (!g.graph.has_node_labels()) {
            throw ArgumentError("one_hot_encode: a graph has no node labels");
        }
        labels.insert(g.graph.node_labels().begin(), g.graph.node_labels().end());
    }
    return {labels.begin(), labels.end()};
}

GraphDataset one_hot_encode(const GraphDataset& dataset) {
    return one_hot_encode(dataset, collect_node_labels(dataset));
}

GraphDataset one_hot_encode(const GraphDataset& dataset, const std::vector<long long>& vocabulary) {
    if (vocabulary.empty()) {
        throw ArgumentError("one_hot_encode: empty label vocabulary");
    }
    if (!std::is_sorted(vocabulary.begin(), vocabulary.end())) {
        throw ArgumentError("one_hot_encode: vocabulary must be sorted");
    }
    GraphDataset out = dataset;
    const std::size_t L = vocabulary.size();
    std::size_t extra = 0;
    bool extra_known = false;
    for (auto& lg : out.graphs) {
        const Graph& g = lg.graph;
        if (!g.has_node_labels()) {
            throw ArgumentError("one_hot_encode: a graph has no node labels");
        }
        const std::size_t d_old = g.has_node_attrs() ? g.attr_dim() : 0;
        if (g.node_count() > 0) {
            if (extra_known && d_old != extra) {
                throw ArgumentError("one_hot_encode: pre-existing attribute dimensions differ");
            }
            extra = d_old;
            extra_known = true;
        }
        std::vector<std::vector<double>> attrs(g.node_count());
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            const long long label = g.node_labels()[v];
            auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), label);
            if (it == vocabulary.end() || *it != label) {
                throw LookupError("one_hot_encode: node label " + std::to_string(label) +
                                  " not in vocabulary");
            }
            std::vector<double> a(L + d_old, 0.0);
            a[static_cast<std::size_t>(it - vocabulary.begin())] = 1.0;
            if (d_old > 0) {
                std::copy(g.node_attrs()[v].begin(), g.node_attrs()[v].end(), a.begin() + L);
            }
            attrs[v] = std::move(a);
        }
        lg.graph = g.with_node_attrs(std::move(attrs));
    }
    out.attr_dim = L + extra;
    out.node_label_vocabulary = vocabulary;
    return out;
}

SyntheticKind parse_synthetic_kind(const std::string& s) {
    if (s == "cycles_vs_stars") return SyntheticKind::cycles_vs_stars;
    if (s == "two_density") return SyntheticKind::two_density;
    throw ArgumentError("unknown synthetic kind '" + s + "' (expected cycles_vs_stars or two_density)");
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::cycles_vs_stars: return "cycles_vs_stars";
        case SyntheticKind::two_density: return "two_density";
    }
    return "unknown";
}

namespace {

Graph labeled_by_degree_bucket(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges) {
    Graph g(n, std::move(edges));
    std::vector<long long> labels(n);
    for (NodeId v = 0; v < n; ++v) {
        labels[v] = static_cast<long long>(std::clamp<std::size_t>(g.degree(v), 1, 3));
    }
    return g.with_node_labels(std::move(labels));
}

Graph make_cycle(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return labeled_by_degree_bucket(n, std::move(edges));
}

Graph make_star(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 1; i < n; ++i) edges.emplace_back(0, i);
    return labeled_by_degree_bucket(n, std::move(edges));
}

Graph make_random(std::size_t n, double p, Rng& rng) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }
    }
    return labeled_by_degree_bucket(n, std::move(edges));
}

}  // namespace

GraphDataset generate_synthetic(SyntheticKind kind, std::size_t per_class,
                                std::size_t size_min, std::size_t size_max, std::uint64_t seed) {
    if (per_class < 1) throw ArgumentError("generate_synthetic: per_class must be >= 1");
    if (size_min < 4 || size_max < size_min) {
        throw ArgumentError("generate_synthetic: invalid size_range (" + std::to_string(size_min) +
                            ", " + std::to_string(size_max) + "); need 4 <= min <= max");
    }
    Rng rng(seed);
    GraphDataset ds;
    ds.name = to_string(kind);
    ds.class_count = 2;
    ds.class_values = {0, 1};
    auto draw_size = [&] {
        return static_cast<std::size_t>(rng.integer(static_cast<long long>(size_min),
                                                    static_cast<long long>(size_max)));
    };
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t cls = 0; cls < 2; ++cls) {
            const std::size_t n = draw_size();
            Graph g;
            if (kind == SyntheticKind::cycles_vs_stars) {
                g = cls == 0 ? make_cycle(n) : make_star(n);
            } else {
                g = make_random(n, cls == 0 ? 0.2 : 0.5, rng);
            }
            ds.graphs.push_back({std::move(g), cls});
        }
    }
    return one_hot_encode(ds);
}

std::vector<std::size_t> stratified_folds(const GraphDataset& dataset, std::size_t n_folds,
                                          std::uint64_t seed) {
    if (n_folds < 2) throw ArgumentError("stratified_folds: n_folds must be >= 2");
    std::vector<std::vector<std::size_t>> by_class(dataset.class_count);
    for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
        const std::size_t c = dataset.graphs[i].class_label;
        if (c >= by_class.size()) by_class.resize(c + 1);
        by_class[c].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < n_folds) {
            throw ArgumentError("stratification error: class " + std::to_string(c) + " has " +
                                std::to_string(by_class[c].size()) + " members, fewer than n_folds=" +
                                std::to_string(n_folds));
        }
    }
    Rng rng(seed);
    std::vector<std::size_t> folds(dataset.graphs.size(), 0);
    // Round-robin continues across classes so fold totals stay balanced too.
    std::size_t next = 0;
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t idx : members) {
            folds[idx] = next;
            next = (next + 1) % n_folds;
        }
    }
    return folds;
}

Split split_by_fold(std::span<const std::size_t> folds, std::size_t held_out) {
    Split s;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        (folds[i] == held_out ? s.validation : s.train).push_back(i);
    }
    return s;
}

}  // namespace dgcnn
