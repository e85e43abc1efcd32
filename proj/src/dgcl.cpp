#include "dgcnn/dgcl.hpp"

#include <cmath>
#include <string>

#include "dgcnn/error.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

std::size_t DgclLayer::parameter_count() const {
    std::size_t n = 0;
    for (const auto& f : filters) n += 3 * f.gmm.size() + f.projection.size() + 1;
    return n;
}

void DgclLayer::validate() const {
    if (filters.empty()) throw ShapeError("dgcl: at least one filter required");
    const std::size_t m = filters.front().gmm.size();
    for (std::size_t e = 0; e < filters.size(); ++e) {
        if (filters[e].projection.size() != attr_dim) {
            throw ShapeError("dgcl: filter " + std::to_string(e) + " projection has dimension " +
                             std::to_string(filters[e].projection.size()) + ", expected " +
                             std::to_string(attr_dim));
        }
        if (filters[e].gmm.size() != m || m == 0) {
            throw ShapeError("dgcl: filters disagree on component count");
        }
    }
}

DgclLayer init_dgcl(std::size_t filters, std::size_t components, std::size_t attr_dim, Rng& rng) {
    if (filters < 1 || components < 1 || attr_dim < 1) {
        throw ArgumentError("init_dgcl: filters, components and attr_dim must be >= 1");
    }
    DgclLayer layer;
    layer.attr_dim = attr_dim;
    const double limit = std::sqrt(6.0 / static_cast<double>(attr_dim + 1));
    layer.filters.resize(filters);
    for (auto& f : layer.filters) {
        f.gmm = init_gmm(components, rng);
        f.projection.resize(attr_dim);
        for (double& a : f.projection) a = rng.uniform(-limit, limit);
        f.bias = 0.0;
    }
    return layer;
}

DgclGradient DgclGradient::zeros_like(const DgclLayer& layer) {
    DgclGradient g;
    g.filters.resize(layer.filters.size());
    for (std::size_t e = 0; e < layer.filters.size(); ++e) {
        g.filters[e].gmm.assign(layer.filters[e].gmm.size(), {});
        g.filters[e].projection.assign(layer.filters[e].projection.size(), 0.0);
    }
    return g;
}

DgclGradient& DgclGradient::operator+=(const DgclGradient& other) {
    for (std::size_t e = 0; e < filters.size(); ++e) {
        auto& f = filters[e];
        const auto& o = other.filters[e];
        for (std::size_t c = 0; c < f.gmm.size(); ++c) {
            f.gmm[c].d_weight += o.gmm[c].d_weight;
            f.gmm[c].d_mean += o.gmm[c].d_mean;
            f.gmm[c].d_std_dev += o.gmm[c].d_std_dev;
        }
        for (std::size_t k = 0; k < f.projection.size(); ++k) f.projection[k] += o.projection[k];
        f.bias += o.bias;
    }
    return *this;
}

DgclGradient& DgclGradient::operator*=(double s) {
    for (auto& f : filters) {
        for (auto& c : f.gmm) {
            c.d_weight *= s;
            c.d_mean *= s;
            c.d_std_dev *= s;
        }
        for (double& a : f.projection) a *= s;
        f.bias *= s;
    }
    return *this;
}

DgclForward dgcl_forward(const DgclLayer& layer, const ReceptiveFieldSet& rf, OpCounter* counter) {
    const std::size_t w = rf.fields.size();
    const std::size_t E = layer.filters.size();
    const std::size_t d = layer.attr_dim;
    DgclForward result{Matrix(w, E), {}};
    result.cache.fields.resize(w);

    for (std::size_t j = 0; j < w; ++j) {
        const auto& nb = rf.fields[j];
        auto& cf = result.cache.fields[j];
        const std::size_t n = nb.entries.size();
        cf.thetas.resize(n);
        cf.attrs.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (nb.entries[i].attrs.size() != d) {
                throw ShapeError("dgcl_forward: field " + std::to_string(j) + " entry " +
                                 std::to_string(i) + " has attribute dimension " +
                                 std::to_string(nb.entries[i].attrs.size()) + ", layer expects " +
                                 std::to_string(d));
            }
            cf.thetas[i] = nb.entries[i].theta;
            cf.attrs[i] = nb.entries[i].attrs;
        }
        cf.gmm_values.assign(E, std::vector<double>(n));
        cf.projected.assign(E, std::vector<double>(n));

        for (std::size_t e = 0; e < E; ++e) {
            const auto& filter = layer.filters[e];
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double g = gmm_eval(filter.gmm, cf.thetas[i]);
                double p = 0.0;
                for (std::size_t k = 0; k < d; ++k) p += filter.projection[k] * cf.attrs[i][k];
                cf.gmm_values[e][i] = g;
                cf.projected[e][i] = p;
                acc += g * p;
            }
            result.output(j, e) = acc + filter.bias;
            if (counter) {
                const std::uint64_t m = filter.gmm.size();
                counter->gaussian_evals += m * n;
                counter->multiply_adds += n * (m + d + 1);
            }
        }
    }
    return result;
}

DgclGradient dgcl_backward(const DgclLayer& layer, const DgclCache& cache, const Matrix& upstream,
                           GradForm form) {
    const std::size_t E = layer.filters.size();
    if (upstream.rows() != cache.fields.size() || upstream.cols() != E) {
        throw ShapeError("dgcl_backward: upstream is " + std::to_string(upstream.rows()) + "x" +
                         std::to_string(upstream.cols()) + ", expected " +
                         std::to_string(cache.fields.size()) + "x" + std::to_string(E));
    }
    DgclGradient grad = DgclGradient::zeros_like(layer);
    for (std::size_t j = 0; j < cache.fields.size(); ++j) {
        const auto& cf = cache.fields[j];
        if (cf.gmm_values.size() != E) throw ShapeError("dgcl_backward: cache does not match layer");
        for (std::size_t e = 0; e < E; ++e) {
            const double up = upstream(j, e);
            auto& gf = grad.filters[e];
            gf.bias += up;
            if (up == 0.0) continue;
            const auto& filter = layer.filters[e];
            for (std::size_t i = 0; i < cf.thetas.size(); ++i) {
                const double scale = up * cf.projected[e][i];
                const GmmGradient partials = gmm_grad(filter.gmm, cf.thetas[i], form);
                for (std::size_t c = 0; c < partials.size(); ++c) {
                    gf.gmm[c].d_weight += scale * partials[c].d_weight;
                    gf.gmm[c].d_mean += scale * partials[c].d_mean;
                    gf.gmm[c].d_std_dev += scale * partials[c].d_std_dev;
                }
                const double g = up * cf.gmm_values[e][i];
                for (std::size_t k = 0; k < gf.projection.size(); ++k) gf.projection[k] += g * cf.attrs[i][k];
            }
        }
    }
    return grad;
}

}  // namespace dgcnn
