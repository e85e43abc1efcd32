#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgcnn/dgcl.hpp"
#include "dgcnn/layers.hpp"
#include "dgcnn/preprocess.hpp"

namespace dgcnn {

struct ModelConfig {
    std::size_t filters = 8;         // E
    std::size_t components = 10;     // m
    std::size_t conv_channels = 16;  // C
    std::size_t hidden_dim = 128;    // H
    double sigma_min = default_sigma_min;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

// dgcl -> conv1d(5, ReLU) -> flatten -> dense(H, ReLU) -> dense(B) -> softmax
struct Network {
    DgclLayer dgcl;
    Conv1dLayer conv;
    DenseLayer hidden;
    DenseLayer output;
    std::size_t key_node_count = 0;
    double sigma_min = default_sigma_min;

    std::size_t class_count() const { return output.out_dim; }
    std::size_t hidden_dim() const { return hidden.out_dim; }
    std::size_t parameter_count() const;
    void validate() const;
    bool operator==(const Network&) const = default;
};

Network make_network(const ModelConfig& model, std::size_t attr_dim, std::size_t class_count,
                     std::size_t key_node_count, std::uint64_t seed);

struct NetworkGradient {
    DgclGradient dgcl;
    std::vector<double> conv_weights, conv_bias;
    std::vector<double> hidden_weights, hidden_bias;
    std::vector<double> output_weights, output_bias;

    static NetworkGradient zeros_like(const Network& net);
    NetworkGradient& operator+=(const NetworkGradient& other);
    NetworkGradient& operator*=(double s);
};

struct NetForward {
    std::vector<double> probabilities;
    std::vector<double> hidden;  // post-ReLU dense hidden activations
    DgclCache dgcl_cache;
    Conv1dCache conv_cache;
    DenseCache hidden_cache;
    DenseCache output_cache;
};

NetForward net_forward(const Network& net, const ReceptiveFieldSet& rf);

struct NetBackward {
    double loss = 0.0;
    NetworkGradient grad;
};

NetBackward net_backward(const Network& net, const NetForward& fwd, std::size_t target_class,
                         LossKind loss = LossKind::squared_error, GradForm form = GradForm::exact);

// Parameter groups, in the canonical flattening order.
enum class ParamGroup {
    gmm_weight,
    gmm_mean,
    gmm_std_dev,
    dgcl_projection,
    dgcl_bias,
    conv_weight,
    conv_bias,
    hidden_weight,
    hidden_bias,
    output_weight,
    output_bias,
};

inline constexpr std::size_t param_group_count = 11;

std::string to_string(ParamGroup g);

// Canonical order: for each DGCL filter (components as weight, mean,
// std-dev triples, then projection, then bias), conv weights, conv bias,
// hidden weights, hidden bias, output weights, output bias.
std::vector<double> flatten_parameters(const Network& net);
void assign_parameters(Network& net, std::span<const double> flat);
std::vector<double> flatten_gradient(const NetworkGradient& grad);
std::vector<ParamGroup> parameter_groups(const Network& net);

struct LearningRates {
    double gmm_weight = 0.01;
    double gmm_mean = 0.01;
    double gmm_std_dev = 0.001;
    double head = 0.01;  // projections, DGCL biases and the standard layers

    static LearningRates from_base(double lambda) { return {lambda, lambda, lambda / 10.0, lambda}; }
};

// p <- p - lambda_group * g, then std-devs clamped to net.sigma_min.
void sgd_apply(Network& net, const NetworkGradient& grad, const LearningRates& rates);

}  // namespace dgcnn
