#pragma once

#include <string>
#include <vector>

#include "paretoscl/config.hpp"
#include "paretoscl/gradcheck.hpp"

namespace paretoscl {

struct LossCheck {
    std::string loss;  // "pos", "neg", "ce", "blend1", "blend2"
    GradCheckResult worst;
    std::size_t probes = 0;  // summed over batches
};

struct GradSuiteResult {
    std::vector<LossCheck> losses;
    std::size_t batches = 0;
    double tolerance = 0.0;
    bool passed() const noexcept;
};

/// Central-difference check of every training objective through a small encoder on
/// random class-blocked batches (2–3 classes, 2–5 rows per class, dropout active).
/// The blends use `lambda`.
GradSuiteResult run_gradient_suite(const GradcheckConfig& config, double tau, double lambda);

}  // namespace paretoscl
