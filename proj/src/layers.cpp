#include "dgcnn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "dgcnn/error.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

namespace {

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

void Conv1dLayer::validate() const {
    if (in_channels == 0 || out_channels == 0) throw ShapeError("conv1d: channel counts must be >= 1");
    if (weights.size() != out_channels * in_channels * kernel_size || bias.size() != out_channels) {
        throw ShapeError("conv1d: parameter arrays do not match channel counts");
    }
}

Conv1dLayer init_conv1d(std::size_t in_channels, std::size_t out_channels, Rng& rng) {
    Conv1dLayer layer;
    layer.in_channels = in_channels;
    layer.out_channels = out_channels;
    layer.weights.resize(out_channels * in_channels * Conv1dLayer::kernel_size);
    layer.bias.assign(out_channels, 0.0);
    const double limit = glorot_limit(in_channels * Conv1dLayer::kernel_size,
                                      out_channels * Conv1dLayer::kernel_size);
    for (double& v : layer.weights) v = rng.uniform(-limit, limit);
    return layer;
}

std::pair<Matrix, Conv1dCache> conv1d_forward(const Conv1dLayer& layer, const Matrix& input) {
    constexpr std::size_t K = Conv1dLayer::kernel_size;
    if (input.cols() != layer.in_channels) {
        throw ShapeError("conv1d_forward: input has " + std::to_string(input.cols()) +
                         " channels, layer expects " + std::to_string(layer.in_channels));
    }
    if (input.rows() < K) {
        throw ShapeError("conv1d_forward: input length " + std::to_string(input.rows()) +
                         " shorter than kernel size 5");
    }
    const std::size_t len = layer.output_length(input.rows());
    Matrix pre(len, layer.out_channels);
    Matrix out(len, layer.out_channels);
    for (std::size_t p = 0; p < len; ++p) {
        for (std::size_t c = 0; c < layer.out_channels; ++c) {
            double acc = layer.bias[c];
            for (std::size_t e = 0; e < layer.in_channels; ++e) {
                for (std::size_t t = 0; t < K; ++t) acc += layer.weight(c, e, t) * input(p + t, e);
            }
            pre(p, c) = acc;
            out(p, c) = acc > 0.0 ? acc : 0.0;
        }
    }
    return {std::move(out), Conv1dCache{input, std::move(pre)}};
}

Conv1dGradient conv1d_backward(const Conv1dLayer& layer, const Conv1dCache& cache,
                               const Matrix& upstream) {
    constexpr std::size_t K = Conv1dLayer::kernel_size;
    if (upstream.rows() != cache.pre_activation.rows() || upstream.cols() != layer.out_channels) {
        throw ShapeError("conv1d_backward: upstream shape mismatch");
    }
    Conv1dGradient g;
    g.weights.assign(layer.weights.size(), 0.0);
    g.bias.assign(layer.out_channels, 0.0);
    g.input = Matrix(cache.input.rows(), layer.in_channels);
    for (std::size_t p = 0; p < upstream.rows(); ++p) {
        for (std::size_t c = 0; c < layer.out_channels; ++c) {
            if (!(cache.pre_activation(p, c) > 0.0)) continue;
            const double d = upstream(p, c);
            g.bias[c] += d;
            for (std::size_t e = 0; e < layer.in_channels; ++e) {
                for (std::size_t t = 0; t < K; ++t) {
                    g.weights[(c * layer.in_channels + e) * K + t] += d * cache.input(p + t, e);
                    g.input(p + t, e) += d * layer.weight(c, e, t);
                }
            }
        }
    }
    return g;
}

void DenseLayer::validate() const {
    if (in_dim == 0 || out_dim == 0) throw ShapeError("dense: dimensions must be >= 1");
    if (weights.size() != in_dim * out_dim || bias.size() != out_dim) {
        throw ShapeError("dense: parameter arrays do not match dimensions");
    }
}

DenseLayer init_dense(std::size_t in_dim, std::size_t out_dim, Activation act, Rng& rng) {
    DenseLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.activation = act;
    layer.weights.resize(in_dim * out_dim);
    layer.bias.assign(out_dim, 0.0);
    const double limit = glorot_limit(in_dim, out_dim);
    for (double& v : layer.weights) v = rng.uniform(-limit, limit);
    return layer;
}

std::pair<std::vector<double>, DenseCache> dense_forward(const DenseLayer& layer,
                                                         std::span<const double> input) {
    if (input.size() != layer.in_dim) {
        throw ShapeError("dense_forward: input size " + std::to_string(input.size()) +
                         ", layer expects " + std::to_string(layer.in_dim));
    }
    std::vector<double> pre(layer.out_dim);
    std::vector<double> out(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        double acc = layer.bias[o];
        const double* row = layer.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) acc += row[i] * input[i];
        pre[o] = acc;
        out[o] = layer.activation == Activation::relu ? std::max(acc, 0.0) : acc;
    }
    return {std::move(out), DenseCache{{input.begin(), input.end()}, std::move(pre)}};
}

DenseGradient dense_backward(const DenseLayer& layer, const DenseCache& cache,
                             std::span<const double> upstream) {
    if (upstream.size() != layer.out_dim || cache.input.size() != layer.in_dim) {
        throw ShapeError("dense_backward: shape mismatch");
    }
    DenseGradient g;
    g.weights.assign(layer.weights.size(), 0.0);
    g.bias.assign(layer.out_dim, 0.0);
    g.input.assign(layer.in_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        double d = upstream[o];
        if (layer.activation == Activation::relu && !(cache.pre_activation[o] > 0.0)) d = 0.0;
        if (d == 0.0) continue;
        g.bias[o] = d;
        const double* row = layer.weights.data() + o * layer.in_dim;
        double* grow = g.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) {
            grow[i] = d * cache.input[i];
            g.input[i] += d * row[i];
        }
    }
    return g;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) return {};
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - peak);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> upstream) {
    double dot = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * upstream[i];
    std::vector<double> g(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) g[i] = probs[i] * (upstream[i] - dot);
    return g;
}

LossKind parse_loss(const std::string& s) {
    if (s == "squared_error") return LossKind::squared_error;
    if (s == "cross_entropy") return LossKind::cross_entropy;
    throw ArgumentError("unknown loss '" + s + "' (expected squared_error or cross_entropy)");
}

std::string to_string(LossKind k) {
    return k == LossKind::squared_error ? "squared_error" : "cross_entropy";
}

LossResult loss_and_grad(std::span<const double> predicted, std::span<const double> target,
                         LossKind kind) {
    if (predicted.size() != target.size()) throw ShapeError("loss_and_grad: size mismatch");
    std::size_t ones = 0;
    for (double t : target) {
        if (t == 1.0) {
            ++ones;
        } else if (t != 0.0) {
            throw ArgumentError("loss_and_grad: target is not one-hot");
        }
    }
    if (ones != 1) throw ArgumentError("loss_and_grad: target is not one-hot");

    LossResult r;
    r.grad.resize(predicted.size());
    for (std::size_t b = 0; b < predicted.size(); ++b) {
        if (kind == LossKind::squared_error) {
            const double diff = predicted[b] - target[b];
            r.loss += 0.5 * diff * diff;
            r.grad[b] = diff;
        } else if (target[b] == 1.0) {
            const double f = std::max(predicted[b], 1e-300);
            r.loss -= std::log(f);
            r.grad[b] = -1.0 / f;
        }
    }
    return r;
}

std::vector<double> one_hot(std::size_t index, std::size_t size) {
    std::vector<double> v(size, 0.0);
    v.at(index) = 1.0;
    return v;
}

}  // namespace dgcnn
