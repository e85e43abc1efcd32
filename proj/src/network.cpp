#include "dgcnn/network.hpp"

#include <algorithm>

#include "dgcnn/error.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

void ModelConfig::validate() const {
    if (filters < 1) throw ArgumentError("model.filters must be >= 1");
    if (components < 1) throw ArgumentError("model.components must be >= 1");
    if (conv_channels < 1) throw ArgumentError("model.conv_channels must be >= 1");
    if (hidden_dim < 1) throw ArgumentError("model.hidden_dim must be >= 1");
    if (!(sigma_min > 0.0)) throw ArgumentError("model.sigma_min must be > 0");
}

std::size_t Network::parameter_count() const {
    return dgcl.parameter_count() + conv.weights.size() + conv.bias.size() + hidden.weights.size() +
           hidden.bias.size() + output.weights.size() + output.bias.size();
}

void Network::validate() const {
    dgcl.validate();
    conv.validate();
    hidden.validate();
    output.validate();
    if (key_node_count < Conv1dLayer::kernel_size) {
        throw ShapeError("network: key_node_count " + std::to_string(key_node_count) +
                         " is smaller than the conv kernel size 5");
    }
    if (conv.in_channels != dgcl.filter_count()) throw ShapeError("network: conv/dgcl channel mismatch");
    if (hidden.in_dim != conv.output_length(key_node_count) * conv.out_channels) {
        throw ShapeError("network: hidden layer input does not match conv output");
    }
    if (output.in_dim != hidden.out_dim) throw ShapeError("network: output/hidden mismatch");
    if (output.out_dim < 2) throw ShapeError("network: at least two classes required");
}

Network make_network(const ModelConfig& model, std::size_t attr_dim, std::size_t class_count,
                     std::size_t key_node_count, std::uint64_t seed) {
    model.validate();
    if (key_node_count < Conv1dLayer::kernel_size) {
        throw ShapeError("network: key_node_count " + std::to_string(key_node_count) +
                         " is smaller than the conv kernel size 5");
    }
    if (class_count < 2) throw ShapeError("network: at least two classes required");
    Rng rng(seed);
    Network net;
    net.key_node_count = key_node_count;
    net.sigma_min = model.sigma_min;
    net.dgcl = init_dgcl(model.filters, model.components, attr_dim, rng);
    net.conv = init_conv1d(model.filters, model.conv_channels, rng);
    const std::size_t flat = net.conv.output_length(key_node_count) * model.conv_channels;
    net.hidden = init_dense(flat, model.hidden_dim, Activation::relu, rng);
    net.output = init_dense(model.hidden_dim, class_count, Activation::identity, rng);
    net.validate();
    return net;
}

NetworkGradient NetworkGradient::zeros_like(const Network& net) {
    NetworkGradient g;
    g.dgcl = DgclGradient::zeros_like(net.dgcl);
    g.conv_weights.assign(net.conv.weights.size(), 0.0);
    g.conv_bias.assign(net.conv.bias.size(), 0.0);
    g.hidden_weights.assign(net.hidden.weights.size(), 0.0);
    g.hidden_bias.assign(net.hidden.bias.size(), 0.0);
    g.output_weights.assign(net.output.weights.size(), 0.0);
    g.output_bias.assign(net.output.bias.size(), 0.0);
    return g;
}

namespace {

void add_into(std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void scale(std::vector<double>& a, double s) {
    for (double& v : a) v *= s;
}

}  // namespace

NetworkGradient& NetworkGradient::operator+=(const NetworkGradient& o) {
    dgcl += o.dgcl;
    add_into(conv_weights, o.conv_weights);
    add_into(conv_bias, o.conv_bias);
    add_into(hidden_weights, o.hidden_weights);
    add_into(hidden_bias, o.hidden_bias);
    add_into(output_weights, o.output_weights);
    add_into(output_bias, o.output_bias);
    return *this;
}

NetworkGradient& NetworkGradient::operator*=(double s) {
    dgcl *= s;
    for (auto* v : {&conv_weights, &conv_bias, &hidden_weights, &hidden_bias, &output_weights, &output_bias}) {
        scale(*v, s);
    }
    return *this;
}

NetForward net_forward(const Network& net, const ReceptiveFieldSet& rf) {
    if (rf.fields.size() != net.key_node_count) {
        throw ShapeError("net_forward: receptive field set has " + std::to_string(rf.fields.size()) +
                         " fields, network expects " + std::to_string(net.key_node_count));
    }
    NetForward f;
    auto dgcl_out = dgcl_forward(net.dgcl, rf);
    f.dgcl_cache = std::move(dgcl_out.cache);
    auto [conv_out, conv_cache] = conv1d_forward(net.conv, dgcl_out.output);
    f.conv_cache = std::move(conv_cache);
    auto [hidden, hidden_cache] = dense_forward(net.hidden, conv_out.data());
    f.hidden_cache = std::move(hidden_cache);
    auto [logits, output_cache] = dense_forward(net.output, hidden);
    f.output_cache = std::move(output_cache);
    f.hidden = std::move(hidden);
    f.probabilities = softmax(logits);
    return f;
}

NetBackward net_backward(const Network& net, const NetForward& fwd, std::size_t target_class,
                         LossKind loss, GradForm form) {
    if (target_class >= net.class_count()) {
        throw ArgumentError("net_backward: target class " + std::to_string(target_class) +
                            " outside [0, " + std::to_string(net.class_count()) + ")");
    }
    NetBackward r;
    const auto target = one_hot(target_class, net.class_count());
    auto lr = loss_and_grad(fwd.probabilities, target, loss);
    r.loss = lr.loss;

    const auto d_logits = softmax_backward(fwd.probabilities, lr.grad);
    auto out_g = dense_backward(net.output, fwd.output_cache, d_logits);
    auto hid_g = dense_backward(net.hidden, fwd.hidden_cache, out_g.input);

    const std::size_t len = fwd.conv_cache.pre_activation.rows();
    Matrix d_conv(len, net.conv.out_channels);
    std::copy(hid_g.input.begin(), hid_g.input.end(), d_conv.data().begin());
    auto conv_g = conv1d_backward(net.conv, fwd.conv_cache, d_conv);

    r.grad.dgcl = dgcl_backward(net.dgcl, fwd.dgcl_cache, conv_g.input, form);
    r.grad.conv_weights = std::move(conv_g.weights);
    r.grad.conv_bias = std::move(conv_g.bias);
    r.grad.hidden_weights = std::move(hid_g.weights);
    r.grad.hidden_bias = std::move(hid_g.bias);
    r.grad.output_weights = std::move(out_g.weights);
    r.grad.output_bias = std::move(out_g.bias);
    return r;
}

std::string to_string(ParamGroup g) {
    switch (g) {
        case ParamGroup::gmm_weight: return "gmm_w";
        case ParamGroup::gmm_mean: return "gmm_mu";
        case ParamGroup::gmm_std_dev: return "gmm_sigma";
        case ParamGroup::dgcl_projection: return "dgcl_projection";
        case ParamGroup::dgcl_bias: return "dgcl_bias";
        case ParamGroup::conv_weight: return "conv_weight";
        case ParamGroup::conv_bias: return "conv_bias";
        case ParamGroup::hidden_weight: return "hidden_weight";
        case ParamGroup::hidden_bias: return "hidden_bias";
        case ParamGroup::output_weight: return "output_weight";
        case ParamGroup::output_bias: return "output_bias";
    }
    return "unknown";
}

namespace {

// Both visitors walk the canonical order documented in network.hpp.
template <typename Fn>
void for_each_parameter(Network& net, Fn&& fn) {
    for (auto& f : net.dgcl.filters) {
        for (auto& c : f.gmm.components) {
            fn(ParamGroup::gmm_weight, c.weight);
            fn(ParamGroup::gmm_mean, c.mean);
            fn(ParamGroup::gmm_std_dev, c.std_dev);
        }
        for (auto& a : f.projection) fn(ParamGroup::dgcl_projection, a);
        fn(ParamGroup::dgcl_bias, f.bias);
    }
    for (auto& v : net.conv.weights) fn(ParamGroup::conv_weight, v);
    for (auto& v : net.conv.bias) fn(ParamGroup::conv_bias, v);
    for (auto& v : net.hidden.weights) fn(ParamGroup::hidden_weight, v);
    for (auto& v : net.hidden.bias) fn(ParamGroup::hidden_bias, v);
    for (auto& v : net.output.weights) fn(ParamGroup::output_weight, v);
    for (auto& v : net.output.bias) fn(ParamGroup::output_bias, v);
}

template <typename Fn>
void for_each_slot(NetworkGradient& g, Fn&& fn) {
    for (auto& f : g.dgcl.filters) {
        for (auto& c : f.gmm) {
            fn(ParamGroup::gmm_weight, c.d_weight);
            fn(ParamGroup::gmm_mean, c.d_mean);
            fn(ParamGroup::gmm_std_dev, c.d_std_dev);
        }
        for (auto& a : f.projection) fn(ParamGroup::dgcl_projection, a);
        fn(ParamGroup::dgcl_bias, f.bias);
    }
    for (auto& v : g.conv_weights) fn(ParamGroup::conv_weight, v);
    for (auto& v : g.conv_bias) fn(ParamGroup::conv_bias, v);
    for (auto& v : g.hidden_weights) fn(ParamGroup::hidden_weight, v);
    for (auto& v : g.hidden_bias) fn(ParamGroup::hidden_bias, v);
    for (auto& v : g.output_weights) fn(ParamGroup::output_weight, v);
    for (auto& v : g.output_bias) fn(ParamGroup::output_bias, v);
}

}  // namespace

std::vector<double> flatten_parameters(const Network& net) {
    std::vector<double> flat;
    flat.reserve(net.parameter_count());
    for_each_parameter(const_cast<Network&>(net), [&](ParamGroup, double& v) { flat.push_back(v); });
    return flat;
}

void assign_parameters(Network& net, std::span<const double> flat) {
    if (flat.size() != net.parameter_count()) {
        throw ShapeError("assign_parameters: expected " + std::to_string(net.parameter_count()) +
                         " values, got " + std::to_string(flat.size()));
    }
    std::size_t i = 0;
    for_each_parameter(net, [&](ParamGroup, double& v) { v = flat[i++]; });
}

std::vector<double> flatten_gradient(const NetworkGradient& grad) {
    std::vector<double> flat;
    for_each_slot(const_cast<NetworkGradient&>(grad), [&](ParamGroup, double& v) { flat.push_back(v); });
    return flat;
}

std::vector<ParamGroup> parameter_groups(const Network& net) {
    std::vector<ParamGroup> groups;
    groups.reserve(net.parameter_count());
    for_each_parameter(const_cast<Network&>(net), [&](ParamGroup g, double&) { groups.push_back(g); });
    return groups;
}

void sgd_apply(Network& net, const NetworkGradient& grad, const LearningRates& rates) {
    const auto flat_grad = flatten_gradient(grad);
    if (flat_grad.size() != net.parameter_count()) {
        throw ShapeError("sgd_apply: gradient does not match network");
    }
    std::size_t i = 0;
    for_each_parameter(net, [&](ParamGroup g, double& v) {
        double lambda = rates.head;
        if (g == ParamGroup::gmm_weight) lambda = rates.gmm_weight;
        if (g == ParamGroup::gmm_mean) lambda = rates.gmm_mean;
        if (g == ParamGroup::gmm_std_dev) lambda = rates.gmm_std_dev;
        v -= lambda * flat_grad[i++];
        if (g == ParamGroup::gmm_std_dev) v = std::max(v, net.sigma_min);
    });
}

}  // namespace dgcnn
