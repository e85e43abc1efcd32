#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>

#include "dgcnn/gmm.hpp"
#include "dgcnn/network.hpp"

namespace dgcnn {

struct GradCheckOptions {
    std::uint64_t seed = 1;
    std::size_t trials = 20;
    GradForm form = GradForm::exact;
    double step = 1e-5;
    double rel_tol = 1e-4;
    double abs_tol = 1e-7;
    // Below this magnitude a partial is judged by abs_tol instead of rel_tol.
    double small_threshold = 1e-3;
};

struct GroupCheck {
    std::size_t checked = 0;
    std::size_t failures = 0;
    double max_rel_error = 0.0;  // among partials above small_threshold
    double max_abs_error = 0.0;  // among partials below it
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    double worst_excess = 0.0;  // error / tolerance of the worst coordinate

    bool passed() const { return failures == 0; }
};

struct GradCheckReport {
    std::array<GroupCheck, param_group_count> groups{};
    std::size_t trials = 0;
    std::size_t resampled = 0;  // trial networks redrawn because a ReLU sat near its kink

    bool passed() const;
    const GroupCheck& group(ParamGroup g) const { return groups[static_cast<std::size_t>(g)]; }
};

// Error of one analytic partial against its numerical estimate, scored
// relative above opts.small_threshold and absolute below it. Returns
// error / tolerance, so values <= 1 pass.
double gradient_excess(double analytic, double numeric, const GradCheckOptions& opts);

// Per trial: one standalone GMM check at a random (params, x) with
// w in [-2, 2], mu in [-3, 3], sigma in [0.1, 3], x in [-3, 3], and one
// end-to-end check of a tiny network (w=6, E=2, m=2, d=2, C=2, H=3, B=2) on
// a random graph covering every parameter group.
GradCheckReport run_gradcheck(const GradCheckOptions& opts);

void print_report(std::ostream& out, const GradCheckReport& report, const GradCheckOptions& opts);

}  // namespace dgcnn
