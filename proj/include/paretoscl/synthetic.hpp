#pragma once

#include <cstdint>
#include <filesystem>

#include "paretoscl/dataset.hpp"

namespace paretoscl {

/// Two-class text task whose classes draw words from disjoint vocabularies.
struct TwoClusterSettings {
    std::size_t vocabulary = 50;  // words per class
    std::size_t min_words = 5;
    std::size_t max_words = 10;
    std::size_t train_size = 200;
    std::size_t dev_size = 400;
};

struct TwoClusterTask {
    Dataset train;
    Dataset dev;
};

/// Balanced classes ("neg", "pos"), labels alternate within each split.
TwoClusterTask make_two_cluster_task(const TwoClusterSettings& settings, std::uint64_t seed);

/// Writes a dataset as a headered `sentence\tlabel` TSV.
void write_tsv(const std::filesystem::path& path, const Dataset& data);

}  // namespace paretoscl
