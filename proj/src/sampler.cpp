#include "paretoscl/sampler.hpp"

#include <string>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

std::size_t ClassBatchIds::total() const noexcept {
    std::size_t n = 0;
    for (const auto& c : per_class) n += c.size();
    return n;
}

ClassBatchIds sample_class_batch(const std::vector<std::vector<std::size_t>>& ids_by_class,
                                 std::size_t total_batch, std::uint64_t step_seed) {
    const std::size_t classes = ids_by_class.size();
    if (classes < 2) throw DataError("class-blocked batches need at least two classes");
    if (total_batch < 2 * classes) {
        throw ConfigError("batch size " + std::to_string(total_batch) + " is below 2·C = " +
                              std::to_string(2 * classes),
                          "batch_size");
    }
    for (std::size_t k = 0; k < classes; ++k) {
        if (ids_by_class[k].empty()) throw DataError("class " + std::to_string(k) + " has no training rows");
        if (ids_by_class[k].size() < 2) {
            throw DataError("class " + std::to_string(k) + " has a single training row; need at least two");
        }
    }

    Rng rng(step_seed);
    const std::size_t start = static_cast<std::size_t>(rng.uniform_index(classes));
    std::vector<std::size_t> quota(classes, total_batch / classes);
    for (std::size_t i = 0; i < total_batch % classes; ++i) ++quota[(start + i) % classes];

    ClassBatchIds out;
    out.per_class.resize(classes);
    for (std::size_t k = 0; k < classes; ++k) {
        std::vector<std::size_t> pool = ids_by_class[k];
        const std::size_t want = quota[k];
        auto& picked = out.per_class[k];
        picked.reserve(want);
        if (pool.size() >= want) {
            for (std::size_t i = 0; i < want; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
                std::swap(pool[i], pool[j]);
                picked.push_back(pool[i]);
            }
        } else {
            // Two distinct anchors first, then independent draws.
            const auto a = static_cast<std::size_t>(rng.uniform_index(pool.size()));
            auto b = static_cast<std::size_t>(rng.uniform_index(pool.size() - 1));
            if (b >= a) ++b;
            picked.push_back(pool[a]);
            picked.push_back(pool[b]);
            while (picked.size() < want) picked.push_back(pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))]);
        }
    }
    return out;
}

}  // namespace paretoscl
