#pragma once

#include <cstdint>
#include <vector>

namespace paretoscl {

/// Row ids for one training step, one list per class id.
struct ClassBatchIds {
    std::vector<std::vector<std::size_t>> per_class;

    std::size_t total() const noexcept;
};

/// Draws a class-blocked mini-batch. Each class gets floor(B/C) rows and the
/// remainder goes to consecutive classes starting at a seeded offset. A
/// class smaller than its quota is sampled with replacement after two
/// distinct draws; otherwise without replacement.
ClassBatchIds sample_class_batch(const std::vector<std::vector<std::size_t>>& ids_by_class,
                                 std::size_t total_batch, std::uint64_t step_seed);

}  // namespace paretoscl
