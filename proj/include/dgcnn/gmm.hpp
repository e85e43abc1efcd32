#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dgcnn {

inline constexpr double default_sigma_min = 1e-3;

struct GaussianComponent {
    double weight = 0.0;   // unconstrained
    double mean = 0.0;
    double std_dev = 1.0;  // > 0

    bool operator==(const GaussianComponent&) const = default;
};

// Weighted sum of Gaussian densities, used as a continuous kernel-weight
// function of theta rather than as a probability density.
struct GmmParams {
    std::vector<GaussianComponent> components;

    std::size_t size() const { return components.size(); }
    void validate(double sigma_min = 0.0) const;
    bool operator==(const GmmParams&) const = default;
};

struct ComponentGradient {
    double d_weight = 0.0;
    double d_mean = 0.0;
    double d_std_dev = 0.0;
};

using GmmGradient = std::vector<ComponentGradient>;

// Which closed forms gmm_grad uses for the mean and std-dev partials.
// Only `exact` is correct. The printed variants are known-wrong closed forms
// (std-dev partial missing a 1/sigma factor, mean partial with its sign
// flipped), kept as negative controls for the finite-difference harness.
enum class GradForm { exact, printed, printed_sigma, printed_mu };

// N(x; mean, std_dev), weight not applied. Throws DomainError for std_dev <= 0.
double gaussian_eval(const GaussianComponent& c, double x);

double gmm_eval(const GmmParams& params, double x);

GmmGradient gmm_grad(const GmmParams& params, double x, GradForm form = GradForm::exact);

// d/dx of gmm_eval; only used to cross-check the numerical oracle.
double gmm_eval_dx(const GmmParams& params, double x);

// Evenly spaced means over [0, 1], std-dev 0.5, weights U(-0.5, 0.5).
class Rng;
GmmParams init_gmm(std::size_t m, Rng& rng);

// Central differences (f(p + h e_j) - f(p - h e_j)) / 2h for each coordinate.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double h = 1e-5);

}  // namespace dgcnn
