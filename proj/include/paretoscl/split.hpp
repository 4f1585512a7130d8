#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "paretoscl/dataset.hpp"

namespace paretoscl {

/// Which file an id list indexes into.
enum class IdSource { train, dev };

const char* to_string(IdSource source) noexcept;

/// Train / validation / test row ids plus the file each list refers to.
/// (source, id) pairs are pairwise disjoint across the three lists.
struct FewShotSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    IdSource train_source = IdSource::train;
    IdSource validation_source = IdSource::dev;
    IdSource test_source = IdSource::dev;
    std::uint64_t seed = 0;

    bool operator==(const FewShotSplit&) const = default;
};

/// Few-shot protocol: N class-balanced (±1) training rows, at most 500 rows
/// drawn from the dev file, half of them (floor) as test and the rest as
/// validation.
FewShotSplit make_fewshot_split(const Dataset& train, const Dataset& dev, std::size_t n, std::uint64_t seed);

/// Full-data protocol: test = all dev rows; validation = seeded 10% of the
/// training rows; train = the remaining 90%.
FewShotSplit make_full_split(const Dataset& train, const Dataset& dev, std::uint64_t seed);

/// Writes `<stem>.train.ids`, `<stem>.validation.ids`, `<stem>.test.ids`
/// (one id per line) and `<stem>.split.json` (sources and seed).
void write_split_manifest(const std::filesystem::path& dir, const std::string& stem, const FewShotSplit& split);

FewShotSplit read_split_manifest(const std::filesystem::path& dir, const std::string& stem);

}  // namespace paretoscl
