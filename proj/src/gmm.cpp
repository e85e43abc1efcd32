#include "dgcnn/gmm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dgcnn/error.hpp"
#include "dgcnn/random.hpp"

namespace dgcnn {

namespace {
constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
}

void GmmParams::validate(double sigma_min) const {
    if (components.empty()) throw ArgumentError("gmm: at least one component required");
    for (std::size_t i = 0; i < components.size(); ++i) {
        const double s = components[i].std_dev;
        if (!(s > 0.0) || s < sigma_min) {
            throw DomainError("gmm: component " + std::to_string(i) + " std_dev " + std::to_string(s) +
                              " below floor");
        }
    }
}

double gaussian_eval(const GaussianComponent& c, double x) {
    if (!(c.std_dev > 0.0)) throw DomainError("gaussian_eval: std_dev must be > 0");
    const double z = (x - c.mean) / c.std_dev;
    return inv_sqrt_2pi / c.std_dev * std::exp(-0.5 * z * z);
}

double gmm_eval(const GmmParams& params, double x) {
    double sum = 0.0;
    for (const auto& c : params.components) sum += c.weight * gaussian_eval(c, x);
    return sum;
}

GmmGradient gmm_grad(const GmmParams& params, double x, GradForm form) {
    GmmGradient grad(params.components.size());
    for (std::size_t i = 0; i < params.components.size(); ++i) {
        const auto& c = params.components[i];
        const double g = gaussian_eval(c, x);
        const double dx = x - c.mean;
        const double s = c.std_dev;
        auto& out = grad[i];
        out.d_weight = g;
        out.d_mean = c.weight * dx / (s * s) * g;
        out.d_std_dev = c.weight * g * (dx * dx / (s * s * s) - 1.0 / s);
        if (form == GradForm::printed || form == GradForm::printed_mu) {
            out.d_mean = -out.d_mean;
        }
        if (form == GradForm::printed || form == GradForm::printed_sigma) {
            out.d_std_dev = c.weight * g * (-1.0 + dx * dx / (s * s));
        }
    }
    return grad;
}

double gmm_eval_dx(const GmmParams& params, double x) {
    double sum = 0.0;
    for (const auto& c : params.components) {
        sum -= c.weight * (x - c.mean) / (c.std_dev * c.std_dev) * gaussian_eval(c, x);
    }
    return sum;
}

GmmParams init_gmm(std::size_t m, Rng& rng) {
    if (m < 1) throw ArgumentError("init_gmm: m must be >= 1");
    GmmParams p;
    p.components.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& c = p.components[i];
        c.mean = m == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(m - 1);
        c.std_dev = 0.5;
        c.weight = rng.uniform(-0.5, 0.5);
    }
    return p;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double h) {
    if (!(h > 0.0)) throw ArgumentError("finite_diff_grad: h must be > 0");
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> grad(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double saved = p[j];
        p[j] = saved + h;
        const double up = f(p);
        p[j] = saved - h;
        const double down = f(p);
        p[j] = saved;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace dgcnn
