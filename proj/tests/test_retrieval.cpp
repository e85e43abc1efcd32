#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dgcnn/error.hpp"
#include "dgcnn/random.hpp"
#include "dgcnn/retrieval.hpp"
#include "dgcnn/train.hpp"

using namespace dgcnn;

namespace {

std::vector<FeatureVector> corpus(std::vector<std::vector<double>> rows) {
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < rows.size(); ++i) out.push_back({i, rows[i]});
    return out;
}

}  // namespace

TEST_CASE("cosine similarity") {
    const std::vector<double> a{1, 2, 3}, b{-2, 1, 0}, z{0, 0, 0};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(a, b) == 0.0);
    CHECK(cosine_similarity(a, z) == 0.0);
    CHECK(cosine_similarity(z, z) == 0.0);
}

TEST_CASE("retrieve") {
    const auto feats = corpus({{1, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 0}, {-1, 0}});
    SUBCASE("duplicate ranks first with score 1") {
        const auto hits = retrieve(0, feats, 3);
        REQUIRE(hits.size() == 3);
        CHECK(hits[0].graph_id == 2);
        CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(hits[1].graph_id == 3);
    }
    SUBCASE("orthogonal and zero vectors score 0, ties by ascending id") {
        const auto hits = retrieve(0, feats, 5);
        CHECK(hits[2].graph_id == 1);
        CHECK(hits[2].score == 0.0);
        CHECK(hits[3].graph_id == 4);
        CHECK(hits[3].score == 0.0);
        CHECK(hits[4].graph_id == 5);
    }
    SUBCASE("k = corpus - 1 is a full ranking without the query") {
        const auto hits = retrieve(3, feats, 5);
        CHECK(hits.size() == 5);
        for (const auto& h : hits) CHECK(h.graph_id != 3);
        for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].score >= hits[i].score);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(retrieve(17, feats, 2), LookupError);
        CHECK_THROWS_AS(retrieve(0, feats, 6), ArgumentError);
    }
    SUBCASE("euclidean ranks by distance") {
        const auto hits = retrieve(1, feats, 5, Similarity::euclidean);
        CHECK(hits[0].graph_id == 3);
        CHECK(hits[0].score == doctest::Approx(-1.0));
    }
}

TEST_CASE("retrieve ordering property on random corpora") {
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> rows(3 + rng.index(20));
        for (auto& r : rows) {
            r.resize(4);
            // coarse values force ties
            for (double& v : r) v = static_cast<double>(rng.index(3));
        }
        const auto feats = corpus(rows);
        const std::size_t q = rng.index(rows.size());
        const auto hits = retrieve(q, feats, rows.size() - 1);
        CHECK(hits == retrieve(q, feats, rows.size() - 1));
        for (std::size_t i = 1; i < hits.size(); ++i) {
            CHECK(hits[i - 1].score >= hits[i].score);
            if (hits[i - 1].score == hits[i].score) CHECK(hits[i - 1].graph_id < hits[i].graph_id);
        }
    }
}

TEST_CASE("precision_at_k") {
    const std::vector<std::size_t> labels{0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1};
    std::vector<RetrievalHit> hits;
    for (std::size_t id : {1, 2, 3, 4, 5}) hits.push_back({id, 1.0});
    CHECK(precision_at_k(hits, 0, labels, 5) == 1.0);

    std::vector<RetrievalHit> mixed;
    for (std::size_t id : {1, 6, 2, 7, 3, 8, 4, 9, 10, 11}) mixed.push_back({id, 1.0});
    CHECK(precision_at_k(mixed, 0, labels, 10) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(precision_at_k(std::vector<RetrievalHit>{{7, 1.0}}, 0, labels, 1) == 0.0);

    // replacing an irrelevant hit with a relevant one never lowers precision
    auto better = mixed;
    better[1] = {5, 1.0};
    CHECK(precision_at_k(better, 0, labels, 10) >= precision_at_k(mixed, 0, labels, 10));
    CHECK(precision_at_k(better, 0, labels, 10) <= 1.0);
}

TEST_CASE("extract_features") {
    auto ds = generate_synthetic(SyntheticKind::cycles_vs_stars, 3, 6, 8, 1);
    ds.graphs.push_back(ds.graphs[0]);
    PreprocessConfig pre;
    pre.key_node_count = 6;
    ReceptiveFieldCache cache;
    std::vector<std::size_t> ids(ds.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    const auto ex = make_examples(ds, ids, pre, cache);
    Network net = make_network(ModelConfig{4, 4, 4, 12}, ds.attr_dim, 2, 6, 3);
    const auto f = extract_features(net, ex);
    REQUIRE(f.size() == ds.size());
    for (const auto& v : f) CHECK(v.values.size() == 12);
    CHECK(f.front().values == f.back().values);
    CHECK(extract_features(net, ex, 2)[3].values == f[3].values);
    for (const auto& v : f)
        for (double x : v.values) CHECK(x >= 0.0);

    std::fill(net.hidden.weights.begin(), net.hidden.weights.end(), 0.0);
    std::fill(net.hidden.bias.begin(), net.hidden.bias.end(), 0.0);
    for (const auto& v : extract_features(net, ex))
        for (double x : v.values) CHECK(x == 0.0);
}

TEST_CASE("retrieval tsv") {
    std::ostringstream out;
    write_retrieval_tsv(out, 4, std::vector<RetrievalHit>{{2, 1.0}, {9, 0.5}});
    CHECK(out.str() == "4\t1\t2\t1\n4\t2\t9\t0.5\n");
}
