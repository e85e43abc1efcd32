#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dgcnn/network.hpp"
#include "dgcnn/train.hpp"

namespace dgcnn {

struct FeatureVector {
    std::size_t graph_id = 0;
    std::vector<double> values;  // post-ReLU dense hidden activations
};

std::vector<FeatureVector> extract_features(const Network& net, std::span<const Example> examples,
                                            std::size_t threads = 1);

enum class Similarity { cosine, euclidean };

Similarity parse_similarity(const std::string& s);

// Cosine similarity, 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct RetrievalHit {
    std::size_t graph_id = 0;
    double score = 0.0;

    bool operator==(const RetrievalHit&) const = default;
};

// Top-k non-query graphs by descending score, ties by ascending graph id.
// Euclidean scores are negated distances so that larger is closer.
std::vector<RetrievalHit> retrieve(std::size_t query_id, std::span<const FeatureVector> features,
                                   std::size_t k, Similarity similarity = Similarity::cosine);

// `labels` is indexed by graph id.
double precision_at_k(std::span<const RetrievalHit> ranked, std::size_t query_label,
                      std::span<const std::size_t> labels, std::size_t k);

// query_id<TAB>rank<TAB>graph_id<TAB>score, rank starting at 1.
void write_retrieval_tsv(std::ostream& out, std::size_t query_id, std::span<const RetrievalHit> hits);

}  // namespace dgcnn
