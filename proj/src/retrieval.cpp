#include "dgcnn/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dgcnn/error.hpp"
#include "dgcnn/parallel.hpp"

namespace dgcnn {

std::vector<FeatureVector> extract_features(const Network& net, std::span<const Example> examples,
                                            std::size_t threads) {
    std::vector<FeatureVector> out(examples.size());
    parallel_for(examples.size(), threads, [&](std::size_t i) {
        out[i].graph_id = examples[i].fields->source_graph_id;
        out[i].values = net_forward(net, *examples[i].fields).hidden;
    });
    return out;
}

Similarity parse_similarity(const std::string& s) {
    if (s == "cosine") return Similarity::cosine;
    if (s == "euclidean") return Similarity::euclidean;
    throw ArgumentError("unknown similarity '" + s + "' (expected cosine or euclidean)");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    // sqrt of the product keeps identical vectors at exactly 1
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

namespace {

double negative_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("euclidean: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return -std::sqrt(s);
}

}  // namespace

std::vector<RetrievalHit> retrieve(std::size_t query_id, std::span<const FeatureVector> features,
                                   std::size_t k, Similarity similarity) {
    const auto q = std::find_if(features.begin(), features.end(),
                                [&](const FeatureVector& f) { return f.graph_id == query_id; });
    if (q == features.end()) throw LookupError("retrieve: unknown query id " + std::to_string(query_id));
    if (k > features.size() - 1) {
        throw ArgumentError("retrieve: k=" + std::to_string(k) + " exceeds corpus size - 1 (" +
                            std::to_string(features.size() - 1) + ")");
    }
    std::vector<RetrievalHit> hits;
    hits.reserve(features.size() - 1);
    for (const auto& f : features) {
        if (&f == &*q) continue;
        const double score = similarity == Similarity::cosine ? cosine_similarity(q->values, f.values)
                                                              : negative_distance(q->values, f.values);
        hits.push_back({f.graph_id, score});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.graph_id < b.graph_id;
    });
    hits.resize(k);
    return hits;
}

double precision_at_k(std::span<const RetrievalHit> ranked, std::size_t query_label,
                      std::span<const std::size_t> labels, std::size_t k) {
    if (k == 0 || k > ranked.size()) {
        throw ArgumentError("precision_at_k: k=" + std::to_string(k) + " outside [1, " +
                            std::to_string(ranked.size()) + "]");
    }
    std::size_t relevant = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (labels[ranked[i].graph_id] == query_label) ++relevant;
    }
    return static_cast<double>(relevant) / static_cast<double>(k);
}

void write_retrieval_tsv(std::ostream& out, std::size_t query_id, std::span<const RetrievalHit> hits) {
    char buf[96];
    for (std::size_t r = 0; r < hits.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%zu\t%zu\t%zu\t%.17g\n", query_id, r + 1, hits[r].graph_id,
                      hits[r].score);
        out << buf;
    }
}

}  // namespace dgcnn
