#include "paretoscl/moo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "paretoscl/errors.hpp"

namespace paretoscl {

PreferenceVector::PreferenceVector(double r1, double r2) : m_r{r1, r2} {
    if (!std::isfinite(r1) || !std::isfinite(r2) || r1 < 0.0 || r2 < 0.0 ||
        std::abs(r1 + r2 - 1.0) > 1e-12) {
        throw ConfigError("preference vector (" + std::to_string(r1) + ", " + std::to_string(r2) +
                              ") is not on the simplex",
                          "r");
    }
}

PreferenceVector PreferenceVector::from_first(double r1) { return {r1, 1.0 - r1}; }

void PreferenceVector::require_strictly_positive() const {
    if (!strictly_positive()) {
        throw ConfigError("EPO needs a strictly positive preference vector, got " + to_string(), "r");
    }
}

std::string PreferenceVector::to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << m_r[0] << ',' << m_r[1];
    return os.str();
}

const char* to_string(EpoMode mode) noexcept {
    return mode == EpoMode::balance ? "balance" : "descent";
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) noexcept {
    bool strict = false;
    for (std::size_t j = 0; j < kObjectives; ++j) {
        if (a[j] > b[j]) return false;
        if (a[j] < b[j]) strict = true;
    }
    return strict;
}

std::array<double, kObjectives> ls_weights(const PreferenceVector& r) { return r.values(); }

NonUniformity non_uniformity(const ObjectivePoint& loss, const PreferenceVector& r) {
    for (double l : loss) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw ContractViolation("non_uniformity needs finite non-negative losses");
        }
    }
    r.require_strictly_positive();

    NonUniformity out;
    double total = 0.0;
    for (std::size_t j = 0; j < kObjectives; ++j) total += r[j] * loss[j];
    if (total == 0.0) {
        out.on_origin = true;
        return out;
    }
    const double m = static_cast<double>(kObjectives);
    for (std::size_t j = 0; j < kObjectives; ++j) {
        out.normalized[j] = r[j] * loss[j] / total;
        if (out.normalized[j] > 0.0) out.mu += out.normalized[j] * std::log(m * out.normalized[j]);
    }
    // Rounding can leave a value of order −1e-17 at the uniform point.
    out.mu = std::max(out.mu, 0.0);
    return out;
}

double ray_gap(const ObjectivePoint& loss, const PreferenceVector& r) noexcept {
    const double a = r[0] * loss[0];
    const double b = r[1] * loss[1];
    return std::abs(a - b) / std::max(1e-12, a + b);
}

EpoWeights min_norm_weights(std::span<const double> g1, std::span<const double> g2) {
    if (g1.size() != g2.size()) throw ContractViolation("min_norm_weights: gradient length mismatch");
    double denom = 0.0;
    double num = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        const double diff = g1[i] - g2[i];
        denom += diff * diff;
        num -= diff * g2[i];
    }
    EpoWeights w;
    w.mode = EpoMode::descent;
    if (denom < 1e-18) return w;
    const double t = std::clamp(num / denom, 0.0, 1.0);
    w.beta = {t, 1.0 - t};
    return w;
}

EpoWeights epo_weights(const ObjectivePoint& loss, std::span<const double> g1, std::span<const double> g2,
                       const PreferenceVector& r, double epsilon_balance) {
    if (!(epsilon_balance > 0.0)) throw ConfigError("epsilon_balance must be positive", "epsilon_balance");
    if (g1.size() != g2.size()) throw ContractViolation("epo_weights: gradient length mismatch");

    const auto nu = non_uniformity(loss, r);
    if (nu.on_origin || nu.mu <= epsilon_balance) return min_norm_weights(g1, g2);

    const double m = static_cast<double>(kObjectives);
    std::array<double, kObjectives> a{};
    for (std::size_t j = 0; j < kObjectives; ++j) {
        const double lhat = std::max(nu.normalized[j], std::numeric_limits<double>::min());
        a[j] = r[j] * (std::log(m * lhat) - nu.mu);
    }

    const double c11 = dot(g1, g1);
    const double c12 = dot(g1, g2);
    const double c22 = dot(g2, g2);
    const std::array<std::array<double, 2>, 2> gram{{{c11, c12}, {c12, c22}}};

    // φ(t) = t·(Ca)₁ + (1−t)·(Ca)₂
    const double ca1 = c11 * a[0] + c12 * a[1];
    const double ca2 = c12 * a[0] + c22 * a[1];

    // Ties in r_jℓ_j resolve to the first objective.
    const std::size_t lagging = (r[1] * loss[1] > r[0] * loss[0]) ? 1 : 0;

    // (Cβ)_{j*} = t·(C_{j*1} − C_{j*2}) + C_{j*2} ≥ 0
    const double slope = gram[lagging][0] - gram[lagging][1];
    const double offset = gram[lagging][1];
    double lo = 0.0;
    double hi = 1.0;
    if (slope > 0.0) {
        lo = std::max(lo, -offset / slope);
    } else if (slope < 0.0) {
        hi = std::min(hi, -offset / slope);
    } else if (offset < 0.0) {
        lo = 1.0;
        hi = 0.0;
    }
    if (lo > hi) return min_norm_weights(g1, g2);

    auto phi = [&](double t) { return t * ca1 + (1.0 - t) * ca2; };
    const double t = phi(hi) > phi(lo) ? hi : lo;

    EpoWeights w;
    w.mode = EpoMode::balance;
    w.beta = {t, 1.0 - t};
    return w;
}

}  // namespace paretoscl
