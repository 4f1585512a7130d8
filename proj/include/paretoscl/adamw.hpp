#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paretoscl/params.hpp"

namespace paretoscl {

struct AdamWSettings {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

struct OptimizerState {
    AdamWSettings settings;
    std::uint64_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;

    static OptimizerState for_params(const ParamVector& params, AdamWSettings settings);
};

/// Decoupled weight decay followed by a bias-corrected Adam update:
///   θ ← θ − lr·wd·θ
///   θ ← θ − lr·m̂ / (√v̂ + eps)
void adamw_step(ParamVector& params, std::span<const double> grad, OptimizerState& state);

/// Same update as `adamw_step` for a gradient that is zero outside `support`
/// (strictly increasing flat indices); bitwise identical to the dense call.
void adamw_step_sparse(ParamVector& params, std::span<const std::size_t> support, std::span<const double> values,
                       OptimizerState& state);

}  // namespace paretoscl
