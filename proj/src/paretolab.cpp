#include "paretoscl/paretolab.hpp"

#include <cmath>
#include <cstring>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

std::uint64_t digest(std::span<const double> theta) {
    std::uint64_t h = kFnvOffset;
    for (double v : theta) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        h = fnv1a64_u64(bits, h);
    }
    return h;
}

}  // namespace

ToyProblem::ToyProblem(std::size_t dim) {
    if (dim == 0) throw ConfigError("toy problem dimension must be positive", "dim");
    m_c.assign(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

ToyProblem::Eval ToyProblem::eval(std::span<const double> theta) const {
    if (theta.size() != dim()) throw ContractViolation("toy_eval: θ has the wrong dimension");
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        d1 += (theta[i] - m_c[i]) * (theta[i] - m_c[i]);
        d2 += (theta[i] + m_c[i]) * (theta[i] + m_c[i]);
    }
    const double e1 = std::exp(-d1);
    const double e2 = std::exp(-d2);
    Eval out;
    out.f = {1.0 - e1, 1.0 - e2};
    out.grad1.resize(dim());
    out.grad2.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        out.grad1[i] = 2.0 * e1 * (theta[i] - m_c[i]);
        out.grad2[i] = 2.0 * e2 * (theta[i] + m_c[i]);
    }
    return out;
}

ObjectivePoint ToyProblem::front_point(double alpha) const {
    // ‖αc ∓ c‖² = (α ∓ 1)² because ‖c‖ = 1.
    return {1.0 - std::exp(-(alpha - 1.0) * (alpha - 1.0)), 1.0 - std::exp(-(alpha + 1.0) * (alpha + 1.0))};
}

ToySolver parse_toy_solver(const std::string& name) {
    if (name == "ls") return ToySolver::ls;
    if (name == "epo") return ToySolver::epo;
    throw ConfigError("unknown toy solver '" + name + "' (expected ls or epo)", "solver");
}

const char* to_string(ToySolver solver) noexcept { return solver == ToySolver::ls ? "ls" : "epo"; }

SolverTrace run_toy(const ToyProblem& problem, ToySolver solver, const PreferenceVector& r,
                    std::vector<double> theta, const ToyRunSettings& settings) {
    if (settings.steps < 1) throw ConfigError("toy run needs at least one step", "steps");
    if (!(settings.step_size > 0.0)) throw ConfigError("step size must be positive", "step_size");
    if (theta.size() != problem.dim()) throw ContractViolation("θ₀ has the wrong dimension");
    if (solver == ToySolver::epo) r.require_strictly_positive();

    SolverTrace trace;
    trace.solver = solver;
    trace.preference = r.values();
    if (settings.record_steps) trace.steps.reserve(static_cast<std::size_t>(settings.steps));

    for (long step = 0; step < settings.steps; ++step) {
        const auto ev = problem.eval(theta);
        std::array<double, kObjectives> weights{};
        std::string mode;
        if (solver == ToySolver::ls) {
            weights = ls_weights(r);
            mode = "ls";
        } else {
            const auto w = epo_weights(ev.f, ev.grad1, ev.grad2, r, settings.epsilon_balance);
            weights = w.beta;
            mode = to_string(w.mode);
        }
        if (settings.record_steps) {
            TraceStep rec;
            rec.step = step;
            rec.theta_digest = digest(theta);
            rec.f = ev.f;
            rec.weights = weights;
            if (r.strictly_positive()) rec.mu = non_uniformity(ev.f, r).mu;
            rec.ray_gap = ray_gap(ev.f, r);
            rec.mode = std::move(mode);
            trace.steps.push_back(std::move(rec));
        }
        double norm2 = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] -= settings.step_size * (weights[0] * ev.grad1[i] + weights[1] * ev.grad2[i]);
            norm2 += theta[i] * theta[i];
        }
        if (!(std::sqrt(norm2) <= 1e6)) {
            throw DivergenceError("toy run diverged at step " + std::to_string(step), step);
        }
    }

    const auto last = problem.eval(theta);
    trace.final_point = last.f;
    trace.final_ray_gap = ray_gap(last.f, r);
    const auto mn = min_norm_weights(last.grad1, last.grad2);
    double s2 = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = mn.beta[0] * last.grad1[i] + mn.beta[1] * last.grad2[i];
        s2 += d * d;
    }
    trace.final_stationarity = std::sqrt(s2);
    trace.final_theta = std::move(theta);
    return trace;
}

std::vector<ObjectivePoint> front_samples(const ToyProblem& problem, std::size_t count) {
    if (count < 2) throw ConfigError("need at least two front samples", "front_samples");
    std::vector<ObjectivePoint> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double alpha = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = problem.front_point(alpha);
    }
    return out;
}

bool front_dominance_check(const ObjectivePoint& point, std::span<const ObjectivePoint> samples, double slack) {
    if (!(slack >= 0.0)) throw ConfigError("slack must be non-negative", "slack");
    for (const auto& s : samples) {
        if (dominates({s[0] + slack, s[1] + slack}, point)) return false;
    }
    return true;
}

std::vector<double> random_init(std::size_t dim, double radius, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            n2 += x * x;
        }
    } while (n2 == 0.0);
    const double scale = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(dim)) / std::sqrt(n2);
    for (auto& x : v) x *= scale;
    return v;
}

}  // namespace paretoscl
