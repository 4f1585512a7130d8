#pragma once

#include <array>
#include <span>
#include <string>

namespace paretoscl {

/// Number of objectives handled by the solvers (positive / negative contrastive).
inline constexpr std::size_t kObjectives = 2;

/// A point r on the probability simplex Ω² (r_j ≥ 0, Σ r_j = 1 ± 1e-12).
class PreferenceVector {
public:
    PreferenceVector(double r1, double r2);

    /// Builds (r1, 1 − r1).
    static PreferenceVector from_first(double r1);

    double operator[](std::size_t j) const { return m_r[j]; }
    const std::array<double, kObjectives>& values() const noexcept { return m_r; }

    bool strictly_positive() const noexcept { return m_r[0] > 0.0 && m_r[1] > 0.0; }

    /// Throws ConfigError (key "r") unless every entry is > 0; EPO needs a finite ray r⁻¹.
    void require_strictly_positive() const;

    std::string to_string() const;

    bool operator==(const PreferenceVector&) const = default;

private:
    std::array<double, kObjectives> m_r;
};

using ObjectivePoint = std::array<double, kObjectives>;

enum class EpoMode { balance, descent };

const char* to_string(EpoMode mode) noexcept;

struct EpoWeights {
    std::array<double, kObjectives> beta{0.5, 0.5};
    EpoMode mode = EpoMode::descent;
};

struct NonUniformity {
    double mu = 0.0;
    std::array<double, kObjectives> normalized{0.5, 0.5};
    /// Σ r_j ℓ_j == 0: the point sits on every ray; μ is reported as 0.
    bool on_origin = false;
};

/// a dominates b: a_j ≤ b_j for all j and a_q < b_q for some q.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) noexcept;

/// Linear scalarization combines gradients with the preference weights directly.
std::array<double, kObjectives> ls_weights(const PreferenceVector& r);

/// ℓ̂_j = r_jℓ_j / Σ r_kℓ_k and μ = Σ ℓ̂_j log(m ℓ̂_j) (KL divergence of ℓ̂
/// from uniform, 0·log 0 := 0).
NonUniformity non_uniformity(const ObjectivePoint& loss, const PreferenceVector& r);

/// |r₁ℓ₁ − r₂ℓ₂| / max(1e-12, r₁ℓ₁ + r₂ℓ₂)
double ray_gap(const ObjectivePoint& loss, const PreferenceVector& r) noexcept;

/// Minimum-norm point of the segment [g₁, g₂]: β = (t, 1−t) with
/// t = clamp((g₂−g₁)·g₂ / ‖g₁−g₂‖², 0, 1); β = (½, ½) when g₁ ≈ g₂.
EpoWeights min_norm_weights(std::span<const double> g1, std::span<const double> g2);

/// Exact Pareto Optimal search weights for two objectives.
///
/// When μ ≤ ε_balance the point is treated as on the ray and the min-norm
/// (pure Pareto descent) weights are returned. Otherwise β(t) = (t, 1−t)
/// maximises aᵀCβ with a_j = r_j(log(mℓ̂_j) − μ) and C the gradient Gram
/// matrix, subject to the lagging objective j* = argmax r_jℓ_j not
/// increasing (g_{j*}·d ≥ 0). An empty feasible interval falls back to
/// min-norm descent.
EpoWeights epo_weights(const ObjectivePoint& loss, std::span<const double> g1, std::span<const double> g2,
                       const PreferenceVector& r, double epsilon_balance);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace paretoscl
