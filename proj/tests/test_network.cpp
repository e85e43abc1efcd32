#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dgcnn/error.hpp"
#include "dgcnn/network.hpp"
#include "dgcnn/preprocess.hpp"
#include "dgcnn/random.hpp"
#include "oracle.hpp"

using namespace dgcnn;

namespace {

ReceptiveFieldSet random_rf(Rng& rng, std::size_t w, std::size_t d) {
    const std::size_t n = 3 + rng.index(7);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.bernoulli(0.4)) edges.emplace_back(u, v);
    std::vector<std::vector<double>> attrs(n);
    for (auto& a : attrs) {
        a.resize(d);
        for (double& x : a) x = rng.uniform(-1, 1);
    }
    PreprocessConfig cfg;
    cfg.key_node_count = w;
    return build_receptive_fields(Graph(n, edges, {}, {}, attrs), cfg);
}

Network tiny_network(Rng& rng, std::uint64_t seed) {
    ModelConfig model{2, 2, 2, 3};
    Network net = make_network(model, 2, 2, 6, seed);
    for (auto& f : net.dgcl.filters) {
        for (auto& c : f.gmm.components) c = {rng.uniform(-2, 2), rng.uniform(-0.5, 1.5), rng.uniform(0.2, 2)};
        f.bias = rng.uniform(-0.5, 0.5);
    }
    return net;
}

bool near_kink(const NetForward& f) {
    for (double p : f.conv_cache.pre_activation.data())
        if (std::abs(p) < 1e-3) return true;
    for (double p : f.hidden_cache.pre_activation)
        if (std::abs(p) < 1e-3) return true;
    return false;
}

double loss_at(const Network& net, const ReceptiveFieldSet& rf, std::size_t target) {
    const auto p = net_forward(net, rf).probabilities;
    return loss_and_grad(p, one_hot(target, p.size())).loss;
}

}  // namespace

TEST_CASE("end-to-end gradient check on tiny networks") {
    std::size_t passed_seeds = 0;
    for (std::uint64_t seed = 1; passed_seeds < 25; ++seed) {
        Rng rng(seed * 7919);
        const Network net = tiny_network(rng, seed);
        const auto rf = random_rf(rng, 6, 2);
        const std::size_t target = rng.index(2);
        const auto fwd = net_forward(net, rf);
        if (near_kink(fwd)) continue;
        ++passed_seeds;
        const auto analytic = flatten_gradient(net_backward(net, fwd, target).grad);
        const auto params = flatten_parameters(net);
        REQUIRE(analytic.size() == params.size());
        REQUIRE(params.size() == net.parameter_count());
        const auto numeric = oracle::central_diff([&](const std::vector<double>& v) {
            Network n = net;
            assign_parameters(n, v);
            return loss_at(n, rf, target);
        }, params);
        double worst = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            CHECK(oracle::grad_close(analytic[i], numeric[i]));
            const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
            if (scale >= 1e-3) worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("cross-entropy gradients also check out") {
    Rng rng(77);
    int done = 0;
    for (std::uint64_t seed = 100; done < 5; ++seed) {
        const Network net = tiny_network(rng, seed);
        const auto rf = random_rf(rng, 6, 2);
        const auto fwd = net_forward(net, rf);
        if (near_kink(fwd)) continue;
        ++done;
        const auto analytic = flatten_gradient(net_backward(net, fwd, 1, LossKind::cross_entropy).grad);
        const auto numeric = oracle::central_diff([&](const std::vector<double>& v) {
            Network n = net;
            assign_parameters(n, v);
            const auto p = net_forward(n, rf).probabilities;
            return loss_and_grad(p, one_hot(1, 2), LossKind::cross_entropy).loss;
        }, flatten_parameters(net));
        for (std::size_t i = 0; i < numeric.size(); ++i) CHECK(oracle::grad_close(analytic[i], numeric[i]));
    }
}

TEST_CASE("small SGD steps do not increase the loss") {
    std::size_t ok = 0;
    const std::size_t trials = 200;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(5000 + t);
        ModelConfig model{4, 5, 4, 16};
        Network net = make_network(model, 3, 2, 8, t);
        const auto rf = random_rf(rng, 8, 3);
        const std::size_t target = rng.index(2);
        const auto fwd = net_forward(net, rf);
        const auto back = net_backward(net, fwd, target);
        sgd_apply(net, back.grad, LearningRates::from_base(1e-3));
        ok += loss_at(net, rf, target) <= back.loss;
    }
    CHECK(static_cast<double>(ok) / trials >= 0.95);
}

TEST_CASE("forward is pure and construction deterministic") {
    Rng rng(1);
    const auto rf = random_rf(rng, 8, 3);
    const ModelConfig model;
    const Network a = make_network(model, 3, 2, 8, 11);
    const Network b = make_network(model, 3, 2, 8, 11);
    CHECK(a == b);
    CHECK_FALSE(a == make_network(model, 3, 2, 8, 12));
    const auto f1 = net_forward(a, rf);
    const auto f2 = net_forward(a, rf);
    CHECK(f1.probabilities == f2.probabilities);
    CHECK(f1.hidden == f2.hidden);
    CHECK(std::abs(std::accumulate(f1.probabilities.begin(), f1.probabilities.end(), 0.0) - 1.0) <= 1e-12);
}

TEST_CASE("duplicated output rows give uniform probabilities") {
    Rng rng(2);
    Network net = make_network(ModelConfig{}, 3, 4, 8, 3);
    const std::size_t H = net.hidden_dim();
    for (std::size_t b = 1; b < 4; ++b) {
        std::copy_n(net.output.weights.begin(), H, net.output.weights.begin() + b * H);
        net.output.bias[b] = net.output.bias[0];
    }
    for (const double p : net_forward(net, random_rf(rng, 8, 3)).probabilities)
        CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("sgd_apply") {
    Network net = make_network(ModelConfig{2, 3, 2, 4}, 2, 2, 6, 1);
    SUBCASE("zero gradient keeps parameters") {
        const Network before = net;
        sgd_apply(net, NetworkGradient::zeros_like(net), LearningRates::from_base(0.5));
        CHECK(net == before);
    }
    SUBCASE("update arithmetic and sigma clamp") {
        auto grad = NetworkGradient::zeros_like(net);
        net.output.bias[0] = 1.0;
        grad.output_bias[0] = 0.5;
        net.dgcl.filters[0].gmm.components[0].std_dev = 0.0015;
        grad.dgcl.filters[0].gmm[0].d_std_dev = 0.1;  // 0.0015 - 0.01 * 0.1 = 0.0005
        sgd_apply(net, grad, {0.1, 0.1, 0.01, 0.1});
        CHECK(net.output.bias[0] == doctest::Approx(0.95).epsilon(1e-15));
        CHECK(net.dgcl.filters[0].gmm.components[0].std_dev == 1e-3);
    }
    SUBCASE("group learning rates") {
        auto grad = NetworkGradient::zeros_like(net);
        for (auto& f : grad.dgcl.filters)
            for (auto& c : f.gmm) c = {1.0, 1.0, 1.0};
        const Network before = net;
        sgd_apply(net, grad, {0.2, 0.3, 0.04, 0.0});
        const auto& c0 = before.dgcl.filters[0].gmm.components[0];
        const auto& c1 = net.dgcl.filters[0].gmm.components[0];
        CHECK(c1.weight == doctest::Approx(c0.weight - 0.2));
        CHECK(c1.mean == doctest::Approx(c0.mean - 0.3));
        CHECK(c1.std_dev == doctest::Approx(c0.std_dev - 0.04));
        CHECK(net.output == before.output);
    }
    CHECK(LearningRates::from_base(0.01).gmm_std_dev == doctest::Approx(0.001));
}

TEST_CASE("parameter layout") {
    const Network net = make_network(ModelConfig{3, 4, 5, 6}, 2, 3, 7, 9);
    const auto groups = parameter_groups(net);
    CHECK(groups.size() == net.parameter_count());
    const std::size_t dgcl = 3 * (3 * 4 + 2 + 1), conv = 5 * 3 * 5 + 5, hidden = 6 * 3 * 5 + 6, out = 3 * 6 + 3;
    CHECK(net.parameter_count() == dgcl + conv + hidden + out);
    std::array<std::size_t, param_group_count> count{};
    for (auto g : groups) ++count[static_cast<std::size_t>(g)];
    CHECK(count[static_cast<std::size_t>(ParamGroup::gmm_std_dev)] == 12);
    CHECK(count[static_cast<std::size_t>(ParamGroup::dgcl_projection)] == 6);
    CHECK(count[static_cast<std::size_t>(ParamGroup::output_bias)] == 3);
    Network copy = net;
    auto flat = flatten_parameters(net);
    for (double& v : flat) v += 1.0;
    assign_parameters(copy, flat);
    CHECK(flatten_parameters(copy) == flat);
    CHECK(to_string(ParamGroup::gmm_std_dev) == "gmm_sigma");
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(make_network(ModelConfig{}, 3, 2, 4, 1), ShapeError);
    ModelConfig bad;
    bad.sigma_min = 0;
    CHECK_THROWS(bad.validate());
    Rng rng(1);
    const Network net = make_network(ModelConfig{}, 3, 2, 8, 1);
    CHECK_THROWS_AS(net_forward(net, random_rf(rng, 7, 3)), ShapeError);
    CHECK_THROWS_AS(net_forward(net, random_rf(rng, 8, 2)), ShapeError);
}
