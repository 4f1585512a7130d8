#include "paretoscl/vectorizer.hpp"

#include <cmath>
#include <map>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::uint64_t hash_ngram(std::string_view ngram, std::uint64_t seed) noexcept {
    return fnv1a64(ngram, fnv1a64_u64(seed));
}

FeatureVector vectorize(std::string_view text, const std::optional<std::string>& text2,
                        const VectorizerSettings& settings) {
    if (settings.hash_dim < 2) throw ConfigError("hash dimension must be at least 2", "hash_dim");
    if (settings.ngram_max < 1) throw ConfigError("ngram_max must be at least 1", "ngram_max");

    auto tokens = tokenize(text);
    if (text2) {
        tokens.emplace_back(kPairSeparator);
        auto second = tokenize(*text2);
        tokens.insert(tokens.end(), second.begin(), second.end());
    }

    std::map<std::uint32_t, double> counts;
    const auto n_tokens = tokens.size();
    for (std::size_t start = 0; start < n_tokens; ++start) {
        std::string gram;
        for (int len = 1; len <= settings.ngram_max && start + len <= n_tokens; ++len) {
            const auto& tok = tokens[start + len - 1];
            if (text2 && tok == kPairSeparator) break;
            if (len > 1) gram.push_back(' ');
            gram += tok;
            counts[static_cast<std::uint32_t>(hash_ngram(gram, settings.hash_seed) % settings.hash_dim)] += 1.0;
        }
    }

    FeatureVector fv;
    fv.dim = settings.hash_dim;
    double norm2 = 0.0;
    for (const auto& [idx, c] : counts) norm2 += c * c;
    const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
    fv.indices.reserve(counts.size());
    fv.weights.reserve(counts.size());
    for (const auto& [idx, c] : counts) {
        fv.indices.push_back(idx);
        fv.weights.push_back(c * inv);
    }
    return fv;
}

}  // namespace paretoscl
