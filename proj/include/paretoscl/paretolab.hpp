#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretoscl/moo.hpp"

namespace paretoscl {

/// f₁(θ) = 1 − exp(−‖θ − c‖²), f₂(θ) = 1 − exp(−‖θ + c‖²), c = (1/√n, …).
/// Pareto set: {αc : α ∈ [−1, 1]}; the front is concave.
class ToyProblem {
public:
    explicit ToyProblem(std::size_t dim);

    std::size_t dim() const noexcept { return m_c.size(); }
    const std::vector<double>& center() const noexcept { return m_c; }

    struct Eval {
        ObjectivePoint f;
        std::vector<double> grad1;
        std::vector<double> grad2;
    };

    Eval eval(std::span<const double> theta) const;

    /// Objective values at θ = αc.
    ObjectivePoint front_point(double alpha) const;

private:
    std::vector<double> m_c;
};

enum class ToySolver { ls, epo };

ToySolver parse_toy_solver(const std::string& name);
const char* to_string(ToySolver solver) noexcept;

struct TraceStep {
    long step = 0;
    std::uint64_t theta_digest = 0;
    ObjectivePoint f{};
    std::array<double, kObjectives> weights{};
    std::optional<double> mu;  // undefined when r has a zero entry
    double ray_gap = 0.0;
    std::string mode;          // "ls", "balance" or "descent"
};

struct SolverTrace {
    ToySolver solver = ToySolver::epo;
    std::array<double, kObjectives> preference{};
    std::vector<TraceStep> steps;
    ObjectivePoint final_point{};
    std::vector<double> final_theta;
    double final_ray_gap = 0.0;
    /// ‖min-norm direction‖ at the final point; zero at Pareto-stationary points.
    double final_stationarity = 0.0;
};

struct ToyRunSettings {
    long steps = 2000;
    double step_size = 0.05;
    double epsilon_balance = 1e-5;
    bool record_steps = true;
};

/// Plain gradient descent θ ← θ − η(β₁∇f₁ + β₂∇f₂), β from ls_weights or epo_weights.
SolverTrace run_toy(const ToyProblem& problem, ToySolver solver, const PreferenceVector& r,
                    std::vector<double> theta0, const ToyRunSettings& settings);

/// `count` points α evenly spaced on [−1, 1] mapped through (f₁, f₂).
std::vector<ObjectivePoint> front_samples(const ToyProblem& problem, std::size_t count = 10000);

/// True iff no sample s has (s + slack) dominating `point`.
bool front_dominance_check(const ObjectivePoint& point, std::span<const ObjectivePoint> samples, double slack);

/// Uniform draw from the n-ball of the given radius.
std::vector<double> random_init(std::size_t dim, double radius, std::uint64_t seed);

}  // namespace paretoscl
