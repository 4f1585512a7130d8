#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paretoscl {

struct VectorizerSettings {
    std::uint32_t hash_dim = 16384;
    int ngram_max = 2;
    std::uint64_t hash_seed = 0;
};

/// Sparse L2-normalised bag of hashed n-grams.
struct FeatureVector {
    std::vector<std::uint32_t> indices;  // strictly increasing, < dim
    std::vector<double> weights;         // unit L2 norm when non-empty
    std::uint32_t dim = 0;

    bool empty() const noexcept { return indices.empty(); }
    bool operator==(const FeatureVector&) const = default;
};

/// Token placed between the two texts of a pair. N-grams that contain it are
/// dropped, so no feature spans the boundary.
inline constexpr std::string_view kPairSeparator = "[SEP]";

std::vector<std::string> tokenize(std::string_view text);

/// FNV-1a 64 of the n-gram (tokens joined by one space) with the seed's
/// little-endian bytes folded in first.
std::uint64_t hash_ngram(std::string_view ngram, std::uint64_t seed) noexcept;

FeatureVector vectorize(std::string_view text, const std::optional<std::string>& text2,
                        const VectorizerSettings& settings);

}  // namespace paretoscl
