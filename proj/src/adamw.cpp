#include "paretoscl/adamw.hpp"

#include <cmath>

#include "paretoscl/errors.hpp"

namespace paretoscl {

OptimizerState OptimizerState::for_params(const ParamVector& params, AdamWSettings settings) {
    if (!(settings.lr > 0.0)) throw ConfigError("learning rate must be positive", "lr");
    if (!(settings.beta1 > 0.0 && settings.beta1 < 1.0)) throw ConfigError("beta1 must lie in (0,1)", "beta1");
    if (!(settings.beta2 > 0.0 && settings.beta2 < 1.0)) throw ConfigError("beta2 must lie in (0,1)", "beta2");
    if (!(settings.eps > 0.0)) throw ConfigError("eps must be positive", "eps");
    if (!(settings.weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative", "weight_decay");
    OptimizerState s;
    s.settings = settings;
    s.first_moment.assign(params.size(), 0.0);
    s.second_moment.assign(params.size(), 0.0);
    return s;
}

namespace {

// `grad_at(i)` yields the gradient of flat index i, in increasing i.
template <typename GradAt>
void adamw_core(ParamVector& params, OptimizerState& state, GradAt&& grad_at) {
    const auto& s = state.settings;
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(s.beta1, t);
    const double bc2 = 1.0 - std::pow(s.beta2, t);
    const double decay = s.lr * s.weight_decay;

    const std::size_t n = params.size();
    double* theta = params.values.data();
    double* m = state.first_moment.data();
    double* v = state.second_moment.data();
    double probe = 0.0;  // non-finite iff some updated entry is
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad_at(i);
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= decay * theta[i];
        theta[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
        probe += theta[i] * 0.0;
    }
    if (!std::isfinite(probe)) require_finite(params.layout, params.values, "adamw_step result");
}

void check_lengths(const ParamVector& params, const OptimizerState& state) {
    const std::size_t n = params.size();
    if (state.first_moment.size() != n || state.second_moment.size() != n) {
        throw ContractViolation("adamw_step: optimizer state length does not match parameters");
    }
}

}  // namespace

void adamw_step(ParamVector& params, std::span<const double> grad, OptimizerState& state) {
    check_lengths(params, state);
    if (grad.size() != params.size()) throw ContractViolation("adamw_step: gradient length does not match parameters");
    require_finite(params.layout, grad, "adamw_step gradient");
    adamw_core(params, state, [&](std::size_t i) { return grad[i]; });
}

void adamw_step_sparse(ParamVector& params, std::span<const std::size_t> support, std::span<const double> values,
                       OptimizerState& state) {
    check_lengths(params, state);
    if (support.size() != values.size()) throw ContractViolation("adamw_step_sparse: support/value length mismatch");
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (support[k] >= params.size() || (k > 0 && support[k] <= support[k - 1])) {
            throw ContractViolation("adamw_step_sparse: support must be strictly increasing and in range");
        }
        if (!std::isfinite(values[k])) {
            throw NumericError("adamw_step gradient: non-finite entry in segment '" +
                               params.layout.segment_of(support[k]) + "' at flat index " +
                               std::to_string(support[k]));
        }
    }
    std::size_t k = 0;
    adamw_core(params, state, [&](std::size_t i) {
        if (k < support.size() && support[k] == i) return values[k++];
        return 0.0;
    });
}

}  // namespace paretoscl
