#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dgcnn/matrix.hpp"

namespace dgcnn {

class Rng;

enum class Activation { relu, identity };

// Valid-mode 1-D convolution along the key-node axis followed by ReLU.
// Weights are laid out [out_channel][in_channel][tap].
struct Conv1dLayer {
    static constexpr std::size_t kernel_size = 5;

    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double& weight(std::size_t c, std::size_t e, std::size_t t) {
        return weights[(c * in_channels + e) * kernel_size + t];
    }
    double weight(std::size_t c, std::size_t e, std::size_t t) const {
        return weights[(c * in_channels + e) * kernel_size + t];
    }
    std::size_t output_length(std::size_t input_length) const { return input_length - kernel_size + 1; }
    void validate() const;
    bool operator==(const Conv1dLayer&) const = default;
};

Conv1dLayer init_conv1d(std::size_t in_channels, std::size_t out_channels, Rng& rng);

struct Conv1dCache {
    Matrix input;
    Matrix pre_activation;
};

struct Conv1dGradient {
    std::vector<double> weights;
    std::vector<double> bias;
    Matrix input;
};

std::pair<Matrix, Conv1dCache> conv1d_forward(const Conv1dLayer& layer, const Matrix& input);
Conv1dGradient conv1d_backward(const Conv1dLayer& layer, const Conv1dCache& cache,
                               const Matrix& upstream);

// Affine layer, weights row-major out x in.
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    Activation activation = Activation::identity;

    void validate() const;
    bool operator==(const DenseLayer&) const = default;
};

DenseLayer init_dense(std::size_t in_dim, std::size_t out_dim, Activation act, Rng& rng);

struct DenseCache {
    std::vector<double> input;
    std::vector<double> pre_activation;
};

struct DenseGradient {
    std::vector<double> weights;
    std::vector<double> bias;
    std::vector<double> input;
};

std::pair<std::vector<double>, DenseCache> dense_forward(const DenseLayer& layer,
                                                         std::span<const double> input);
DenseGradient dense_backward(const DenseLayer& layer, const DenseCache& cache,
                             std::span<const double> upstream);

std::vector<double> softmax(std::span<const double> logits);

// Vector-Jacobian product of softmax: d loss / d logits from d loss / d probs.
std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> upstream);

enum class LossKind { squared_error, cross_entropy };

LossKind parse_loss(const std::string& s);
std::string to_string(LossKind k);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d predicted
};

// squared_error: 0.5 * sum (t - f)^2, grad f - t.
// cross_entropy (not the default): -sum t log f, grad -t / f.
// Throws ArgumentError unless target is one-hot.
LossResult loss_and_grad(std::span<const double> predicted, std::span<const double> target,
                         LossKind kind = LossKind::squared_error);

std::vector<double> one_hot(std::size_t index, std::size_t size);

}  // namespace dgcnn
