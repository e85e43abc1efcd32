#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgcnn/gmm.hpp"
#include "dgcnn/matrix.hpp"
#include "dgcnn/preprocess.hpp"

namespace dgcnn {

class Rng;

// One output channel of the disordered convolution: the GMM maps each
// entry's theta to a kernel weight, the projection reduces the entry's
// attribute vector to a scalar.
struct DgclFilter {
    GmmParams gmm;
    std::vector<double> projection;
    double bias = 0.0;

    bool operator==(const DgclFilter&) const = default;
};

struct DgclLayer {
    std::vector<DgclFilter> filters;
    std::size_t attr_dim = 0;

    std::size_t filter_count() const { return filters.size(); }
    std::size_t component_count() const { return filters.empty() ? 0 : filters.front().gmm.size(); }
    // E * (3m + d + 1)
    std::size_t parameter_count() const;
    void validate() const;
    bool operator==(const DgclLayer&) const = default;
};

DgclLayer init_dgcl(std::size_t filters, std::size_t components, std::size_t attr_dim, Rng& rng);

struct DgclCache {
    struct Field {
        std::vector<double> thetas;
        std::vector<std::vector<double>> attrs;
        // [filter][entry]
        std::vector<std::vector<double>> gmm_values;
        std::vector<std::vector<double>> projected;
    };
    std::vector<Field> fields;
};

struct DgclGradient {
    struct Filter {
        GmmGradient gmm;
        std::vector<double> projection;
        double bias = 0.0;
    };
    std::vector<Filter> filters;

    static DgclGradient zeros_like(const DgclLayer& layer);
    DgclGradient& operator+=(const DgclGradient& other);
    DgclGradient& operator*=(double s);
};

// Work done by a forward pass, for complexity checks.
struct OpCounter {
    std::uint64_t gaussian_evals = 0;
    std::uint64_t multiply_adds = 0;
};

struct DgclForward {
    Matrix output;  // w x E
    DgclCache cache;
};

// out[j][e] = sum_i GMM_e(theta_i) * <a_e, X_i> + b_e, summed in entry order.
DgclForward dgcl_forward(const DgclLayer& layer, const ReceptiveFieldSet& rf,
                         OpCounter* counter = nullptr);

// Parameter gradients of a scalar loss given d loss / d out. The receptive
// field is data, so no input gradient is produced.
DgclGradient dgcl_backward(const DgclLayer& layer, const DgclCache& cache, const Matrix& upstream,
                           GradForm form = GradForm::exact);

}  // namespace dgcnn
