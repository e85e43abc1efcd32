#include "dgcnn/tu_format.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>

#include "dgcnn/error.hpp"

namespace dgcnn {

namespace fs = std::filesystem;

namespace {

struct LineFile {
    std::string label;  // file name used in diagnostics
    std::vector<std::string> lines;
};

std::optional<LineFile> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    LineFile f;
    f.label = path.filename().string();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        f.lines.push_back(std::move(line));
    }
    // Trailing blank lines carry no records.
    while (!f.lines.empty() && f.lines.back().find_first_not_of(" \t") == std::string::npos) {
        f.lines.pop_back();
    }
    return f;
}

LineFile require_lines(const fs::path& path) {
    auto f = read_lines(path);
    if (!f) throw ParseError("missing file: " + path.string());
    return std::move(*f);
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                           : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail_at(const LineFile& f, std::size_t line_index, const std::string& what) {
    throw ParseError(f.label + ":" + std::to_string(line_index + 1) + ": " + what);
}

long long parse_int(const LineFile& f, std::size_t line_index, std::string_view token) {
    long long value = 0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end) {
        fail_at(f, line_index, "expected integer, got '" + std::string(token) + "'");
    }
    return value;
}

double parse_real(const LineFile& f, std::size_t line_index, std::string_view token) {
    double value = 0.0;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end) {
        fail_at(f, line_index, "expected number, got '" + std::string(token) + "'");
    }
    return value;
}

long long single_int(const LineFile& f, std::size_t i) {
    auto fields = split_fields(f.lines[i]);
    if (fields.size() != 1) fail_at(f, i, "expected a single integer");
    return parse_int(f, i, fields[0]);
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

GraphDataset parse_tu_dataset(const fs::path& directory, const std::string& name,
                              const TuOptions& options) {
    const auto file = [&](const char* suffix) { return directory / (name + suffix); };
    const LineFile adjacency = require_lines(file("_A.txt"));
    const LineFile indicator = require_lines(file("_graph_indicator.txt"));
    const LineFile graph_labels = require_lines(file("_graph_labels.txt"));
    const auto node_labels = read_lines(file("_node_labels.txt"));
    const auto edge_labels =
        options.edge_labels_as_weights ? read_lines(file("_edge_labels.txt")) : std::nullopt;
    const auto node_attributes = read_lines(file("_node_attributes.txt"));

    const std::size_t total_nodes = indicator.lines.size();
    const std::size_t graph_count = graph_labels.lines.size();

    // Global node -> (graph, local index).
    std::vector<std::size_t> graph_of(total_nodes);
    std::vector<std::size_t> local_of(total_nodes);
    std::vector<std::size_t> node_counts(graph_count, 0);
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const long long gid = single_int(indicator, i);
        if (gid < 1 || static_cast<std::size_t>(gid) > graph_count) {
            fail_at(indicator, i, "inconsistent indicator: graph id " + std::to_string(gid) +
                                      " outside [1, " + std::to_string(graph_count) + "]");
        }
        graph_of[i] = static_cast<std::size_t>(gid - 1);
        local_of[i] = node_counts[graph_of[i]]++;
    }

    std::vector<long long> raw_graph_labels(graph_count);
    for (std::size_t g = 0; g < graph_count; ++g) raw_graph_labels[g] = single_int(graph_labels, g);

    std::vector<long long> raw_node_labels(total_nodes, 0);
    if (node_labels) {
        if (node_labels->lines.size() != total_nodes) {
            throw ParseError(node_labels->label + ": " + std::to_string(node_labels->lines.size()) +
                             " lines, expected one per node (" + std::to_string(total_nodes) + ")");
        }
        for (std::size_t i = 0; i < total_nodes; ++i) raw_node_labels[i] = single_int(*node_labels, i);
    }

    std::vector<std::vector<double>> raw_attrs;
    if (node_attributes) {
        if (node_attributes->lines.size() != total_nodes) {
            throw ParseError(node_attributes->label + ": expected one line per node (" +
                             std::to_string(total_nodes) + ")");
        }
        raw_attrs.resize(total_nodes);
        for (std::size_t i = 0; i < total_nodes; ++i) {
            for (auto tok : split_fields(node_attributes->lines[i])) {
                raw_attrs[i].push_back(parse_real(*node_attributes, i, tok));
            }
        }
    }

    if (edge_labels && edge_labels->lines.size() != adjacency.lines.size()) {
        throw ParseError(edge_labels->label + ": expected one line per edge line in " + adjacency.label);
    }

    std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(graph_count);
    std::vector<std::vector<double>> weights(graph_count);
    for (std::size_t i = 0; i < adjacency.lines.size(); ++i) {
        auto fields = split_fields(adjacency.lines[i]);
        if (fields.size() != 2) fail_at(adjacency, i, "expected 'u, v'");
        const long long u = parse_int(adjacency, i, fields[0]);
        const long long v = parse_int(adjacency, i, fields[1]);
        for (long long x : {u, v}) {
            if (x < 1 || static_cast<std::size_t>(x) > total_nodes) {
                fail_at(adjacency, i, "inconsistent indicator: node " + std::to_string(x) +
                                          " has no graph indicator entry (" +
                                          std::to_string(total_nodes) + " nodes)");
            }
        }
        const std::size_t gu = graph_of[static_cast<std::size_t>(u - 1)];
        const std::size_t gv = graph_of[static_cast<std::size_t>(v - 1)];
        if (gu != gv) {
            fail_at(adjacency, i, "inconsistent indicator: edge crosses graphs " +
                                      std::to_string(gu + 1) + " and " + std::to_string(gv + 1));
        }
        if (u == v) fail_at(adjacency, i, "self-loop");
        edges[gu].emplace_back(local_of[static_cast<std::size_t>(u - 1)],
                               local_of[static_cast<std::size_t>(v - 1)]);
        if (edge_labels) {
            auto wf = split_fields(edge_labels->lines[i]);
            if (wf.size() != 1) fail_at(*edge_labels, i, "expected a single value");
            const double w = parse_real(*edge_labels, i, wf[0]);
            if (!(w > 0.0)) fail_at(*edge_labels, i, "edge weight must be positive");
            weights[gu].push_back(w);
        }
    }

    // Sorted-ascending remap of graph labels.
    std::set<long long> distinct(raw_graph_labels.begin(), raw_graph_labels.end());
    GraphDataset ds;
    ds.name = name;
    ds.class_values.assign(distinct.begin(), distinct.end());
    ds.class_count = ds.class_values.size();

    std::vector<std::vector<long long>> labels(graph_count);
    std::vector<std::vector<std::vector<double>>> attrs(graph_count);
    for (std::size_t g = 0; g < graph_count; ++g) {
        labels[g].resize(node_counts[g]);
        if (!raw_attrs.empty()) attrs[g].resize(node_counts[g]);
    }
    for (std::size_t i = 0; i < total_nodes; ++i) {
        labels[graph_of[i]][local_of[i]] = raw_node_labels[i];
        if (!raw_attrs.empty()) attrs[graph_of[i]][local_of[i]] = std::move(raw_attrs[i]);
    }

    ds.graphs.reserve(graph_count);
    for (std::size_t g = 0; g < graph_count; ++g) {
        const auto it = std::lower_bound(ds.class_values.begin(), ds.class_values.end(),
                                         raw_graph_labels[g]);
        const auto cls = static_cast<std::size_t>(it - ds.class_values.begin());
        try {
            ds.graphs.push_back({Graph(node_counts[g], std::move(edges[g]), std::move(weights[g]),
                                       std::move(labels[g]), std::move(attrs[g])),
                                 cls});
        } catch (const ArgumentError& e) {
            throw ParseError(name + ": graph " + std::to_string(g + 1) + ": " + e.what());
        }
    }
    ds.attr_dim = 0;
    for (const auto& lg : ds.graphs) {
        if (lg.graph.node_count() > 0) {
            ds.attr_dim = lg.graph.attr_dim();
            break;
        }
    }
    return ds;
}

void write_tu_dataset(const GraphDataset& dataset, const fs::path& directory, const std::string& name,
                      bool write_attributes) {
    std::error_code ec;
    fs::create_directories(directory, ec);
    const auto open = [&](const char* suffix) {
        const fs::path p = directory / (name + suffix);
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + p.string());
        return out;
    };

    bool any_weighted = false;
    bool any_attrs = false;
    for (const auto& lg : dataset.graphs) {
        any_weighted = any_weighted || lg.graph.weighted();
        any_attrs = any_attrs || lg.graph.has_node_attrs();
    }
    any_attrs = any_attrs && write_attributes;

    auto a_out = open("_A.txt");
    auto ind_out = open("_graph_indicator.txt");
    auto gl_out = open("_graph_labels.txt");
    auto nl_out = open("_node_labels.txt");
    std::ofstream el_out, na_out;
    if (any_weighted) el_out = open("_edge_labels.txt");
    if (any_attrs) na_out = open("_node_attributes.txt");

    std::size_t offset = 0;
    for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
        const Graph& graph = dataset.graphs[g].graph;
        for (std::size_t v = 0; v < graph.node_count(); ++v) {
            ind_out << (g + 1) << '\n';
            nl_out << (graph.node_labels().empty() ? 0 : graph.node_labels()[v]) << '\n';
            if (any_attrs) {
                const auto& a = graph.node_attrs()[v];
                for (std::size_t k = 0; k < a.size(); ++k) na_out << (k ? ", " : "") << format_real(a[k]);
                na_out << '\n';
            }
        }
        for (std::size_t e = 0; e < graph.edge_count(); ++e) {
            const auto [u, v] = graph.edges()[e];
            a_out << (offset + u + 1) << ", " << (offset + v + 1) << '\n';
            a_out << (offset + v + 1) << ", " << (offset + u + 1) << '\n';
            if (any_weighted) {
                const std::string w = format_real(graph.edge_weights()[e]);
                el_out << w << '\n' << w << '\n';
            }
        }
        const std::size_t cls = dataset.graphs[g].class_label;
        gl_out << (cls < dataset.class_values.size() ? dataset.class_values[cls]
                                                      : static_cast<long long>(cls))
               << '\n';
        offset += graph.node_count();
    }
    for (std::ofstream* f : {&a_out, &ind_out, &gl_out, &nl_out}) {
        f->flush();
        if (!*f) throw Error("write failed under " + directory.string());
    }
}

}  // namespace dgcnn
