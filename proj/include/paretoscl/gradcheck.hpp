#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "paretoscl/params.hpp"

namespace paretoscl {

using ScalarObjective = std::function<double(const ParamVector&)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double worst_numeric = 0.0;
    double worst_analytic = 0.0;
    std::size_t probes = 0;
};

/// Deterministic probe set: half drawn from coordinates where the analytic
/// gradient is non-zero, the rest uniformly from all coordinates. Distinct,
/// sorted.
std::vector<std::size_t> select_probes(std::span<const double> analytic, std::size_t count, std::uint64_t seed);

/// Central differences at the given coordinates. Relative error per probe is
/// |fd − g| / max(1e-8, |fd| + |g|).
GradCheckResult finite_diff_check(const ScalarObjective& objective, const ParamVector& params,
                                  std::span<const double> analytic, std::span<const std::size_t> probes,
                                  double h = 1e-5);

GradCheckResult finite_diff_check(const ScalarObjective& objective, const ParamVector& params,
                                  std::span<const double> analytic, std::size_t probe_count, double h = 1e-5,
                                  std::uint64_t seed = 0);

}  // namespace paretoscl
