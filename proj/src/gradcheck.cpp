#include "dgcnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dgcnn/preprocess.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

bool GradCheckReport::passed() const {
    return std::all_of(groups.begin(), groups.end(), [](const GroupCheck& g) { return g.passed(); });
}

double gradient_excess(double analytic, double numeric, const GradCheckOptions& opts) {
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < opts.small_threshold) return diff / opts.abs_tol;
    return diff / scale / opts.rel_tol;
}

namespace {

void record(GroupCheck& g, double analytic, double numeric, const GradCheckOptions& opts) {
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    const double excess = gradient_excess(analytic, numeric, opts);
    ++g.checked;
    if (scale < opts.small_threshold) {
        g.max_abs_error = std::max(g.max_abs_error, diff);
    } else {
        g.max_rel_error = std::max(g.max_rel_error, diff / scale);
    }
    if (excess > 1.0) ++g.failures;
    if (excess > g.worst_excess || g.checked == 1) {
        g.worst_excess = excess;
        g.worst_analytic = analytic;
        g.worst_numeric = numeric;
    }
}

GroupCheck& slot(GradCheckReport& r, ParamGroup g) { return r.groups[static_cast<std::size_t>(g)]; }

void check_standalone_gmm(Rng& rng, GradCheckReport& report, const GradCheckOptions& opts) {
    GmmParams p;
    p.components.resize(static_cast<std::size_t>(rng.integer(1, 4)));
    for (auto& c : p.components) {
        c.weight = rng.uniform(-2.0, 2.0);
        c.mean = rng.uniform(-3.0, 3.0);
        c.std_dev = rng.uniform(0.1, 3.0);
    }
    const double x = rng.uniform(-3.0, 3.0);
    std::vector<double> flat;
    for (const auto& c : p.components) flat.insert(flat.end(), {c.weight, c.mean, c.std_dev});
    const auto numeric = finite_diff_grad(
        [&](std::span<const double> v) {
            GmmParams q = p;
            for (std::size_t i = 0; i < q.components.size(); ++i) {
                q.components[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
            }
            return gmm_eval(q, x);
        },
        flat, opts.step);
    const auto analytic = gmm_grad(p, x, opts.form);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        record(slot(report, ParamGroup::gmm_weight), analytic[i].d_weight, numeric[3 * i], opts);
        record(slot(report, ParamGroup::gmm_mean), analytic[i].d_mean, numeric[3 * i + 1], opts);
        record(slot(report, ParamGroup::gmm_std_dev), analytic[i].d_std_dev, numeric[3 * i + 2], opts);
    }
}

Graph random_graph(Rng& rng, bool weighted) {
    const auto n = static_cast<std::size_t>(rng.integer(3, 9));
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::vector<double> weights;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            if (rng.bernoulli(0.4)) {
                edges.emplace_back(i, j);
                weights.push_back(rng.uniform(0.2, 2.0));
            }
        }
    }
    std::vector<std::vector<double>> attrs(n);
    for (auto& a : attrs) a = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return Graph(n, std::move(edges), weighted ? std::move(weights) : std::vector<double>{}, {},
                 std::move(attrs));
}

double min_relu_margin(const NetForward& f) {
    double m = INFINITY;
    for (double v : f.conv_cache.pre_activation.data()) m = std::min(m, std::abs(v));
    for (double v : f.hidden_cache.pre_activation) m = std::min(m, std::abs(v));
    return m;
}

void check_network(Rng& rng, GradCheckReport& report, const GradCheckOptions& opts) {
    constexpr double relu_margin = 1e-3;
    ModelConfig model;
    model.filters = 2;
    model.components = 2;
    model.conv_channels = 2;
    model.hidden_dim = 3;
    PreprocessConfig pre;
    pre.key_node_count = 6;
    pre.stride = 1;
    pre.neighborhood_depth = 2;

    Network net;
    ReceptiveFieldSet rf;
    std::size_t target = 0;
    for (;;) {
        const bool weighted = rng.bernoulli(0.5);
        pre.theta_rule = weighted ? ThetaRule::edge_weight : ThetaRule::inverse_hop;
        const Graph g = random_graph(rng, weighted);
        rf = build_receptive_fields(g, pre);
        net = make_network(model, 2, 2, pre.key_node_count, rng.next_u64());
        for (auto& f : net.dgcl.filters) {
            for (auto& c : f.gmm.components) {
                c.weight = rng.uniform(-2.0, 2.0);
                c.mean = rng.uniform(-3.0, 3.0);
                c.std_dev = rng.uniform(0.1, 3.0);
            }
            f.bias = rng.uniform(-0.5, 0.5);
        }
        for (double& b : net.conv.bias) b = rng.uniform(-0.5, 0.5);
        for (double& b : net.hidden.bias) b = rng.uniform(-0.5, 0.5);
        for (double& b : net.output.bias) b = rng.uniform(-0.5, 0.5);
        target = rng.index(2);
        if (min_relu_margin(net_forward(net, rf)) >= relu_margin) break;
        ++report.resampled;
    }

    const auto fwd = net_forward(net, rf);
    const auto analytic = flatten_gradient(net_backward(net, fwd, target, LossKind::squared_error, opts.form).grad);
    const auto groups = parameter_groups(net);
    const auto base = flatten_parameters(net);
    Network probe = net;
    const auto numeric = finite_diff_grad(
        [&](std::span<const double> v) {
            assign_parameters(probe, v);
            const auto f = net_forward(probe, rf);
            return loss_and_grad(f.probabilities, one_hot(target, 2)).loss;
        },
        base, opts.step);
    for (std::size_t i = 0; i < analytic.size(); ++i) record(slot(report, groups[i]), analytic[i], numeric[i], opts);
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckOptions& opts) {
    GradCheckReport report;
    report.trials = opts.trials;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        Rng rng(derive_seed(opts.seed, t));
        check_standalone_gmm(rng, report, opts);
        check_network(rng, report, opts);
    }
    return report;
}

void print_report(std::ostream& out, const GradCheckReport& report, const GradCheckOptions& opts) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "gradcheck: trials=%zu step=%g rel_tol=%g abs_tol=%g (below %g) resampled=%zu\n",
                  report.trials, opts.step, opts.rel_tol, opts.abs_tol, opts.small_threshold, report.resampled);
    out << buf;
    for (std::size_t i = 0; i < param_group_count; ++i) {
        const auto& g = report.groups[i];
        std::snprintf(buf, sizeof buf, "%-16s checked=%-5zu max_rel_err=%.3e max_abs_err=%.3e %s\n",
                      to_string(static_cast<ParamGroup>(i)).c_str(), g.checked, g.max_rel_error,
                      g.max_abs_error, g.passed() ? "ok" : "FAIL");
        out << buf;
    }
    for (std::size_t i = 0; i < param_group_count; ++i) {
        const auto& g = report.groups[i];
        if (g.passed()) continue;
        std::snprintf(buf, sizeof buf, "FAIL %s: %zu of %zu partials out of tolerance; worst analytic=%.10g numeric=%.10g\n",
                      to_string(static_cast<ParamGroup>(i)).c_str(), g.failures, g.checked, g.worst_analytic,
                      g.worst_numeric);
        out << buf;
    }
    out << (report.passed() ? "gradcheck passed\n" : "gradcheck FAILED\n");
}

}  // namespace dgcnn
