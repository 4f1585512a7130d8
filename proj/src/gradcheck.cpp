#include "paretoscl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

std::vector<std::size_t> select_probes(std::span<const double> analytic, std::size_t count, std::uint64_t seed) {
    const std::size_t n = analytic.size();
    if (count >= n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i) {
        if (analytic[i] != 0.0) support.push_back(i);
    }

    Rng rng(seed);
    std::set<std::size_t> chosen;
    rng.shuffle(std::span<std::size_t>(support));
    for (std::size_t i = 0; i < support.size() && chosen.size() < count / 2; ++i) chosen.insert(support[i]);
    while (chosen.size() < count) chosen.insert(static_cast<std::size_t>(rng.uniform_index(n)));
    return {chosen.begin(), chosen.end()};
}

GradCheckResult finite_diff_check(const ScalarObjective& objective, const ParamVector& params,
                                  std::span<const double> analytic, std::span<const std::size_t> probes,
                                  double h) {
    if (probes.empty()) throw ConfigError("finite_diff_check needs at least one probe", "probes");
    if (!(h > 0.0)) throw ConfigError("finite_diff_check step must be positive", "h");
    if (analytic.size() != params.size()) throw ContractViolation("analytic gradient length mismatch");

    GradCheckResult result;
    ParamVector work = params;
    for (auto i : probes) {
        if (i >= params.size()) throw ContractViolation("probe index out of range");
        const double saved = work.values[i];
        work.values[i] = saved + h;
        const double up = objective(work);
        work.values[i] = saved - h;
        const double down = objective(work);
        work.values[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw NumericError("objective returned a non-finite value while probing index " + std::to_string(i));
        }
        const double fd = (up - down) / (2.0 * h);
        const double err = std::abs(fd - analytic[i]) / std::max(1e-8, std::abs(fd) + std::abs(analytic[i]));
        if (err > result.max_rel_error || result.probes == 0) {
            result.max_rel_error = std::max(result.max_rel_error, err);
            result.worst_index = i;
            result.worst_numeric = fd;
            result.worst_analytic = analytic[i];
        }
        ++result.probes;
    }
    return result;
}

GradCheckResult finite_diff_check(const ScalarObjective& objective, const ParamVector& params,
                                  std::span<const double> analytic, std::size_t probe_count, double h,
                                  std::uint64_t seed) {
    if (probe_count == 0) throw ConfigError("finite_diff_check needs at least one probe", "probes");
    const auto probes = select_probes(analytic, probe_count, seed);
    return finite_diff_check(objective, params, analytic, probes, h);
}

}  // namespace paretoscl
