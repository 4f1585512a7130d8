#include "paretoscl/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

std::string word(int cls, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", cls == 0 ? "kel" : "mor", index);
    return buf;
}

Dataset make_split(const TwoClusterSettings& s, std::size_t size, Rng& rng) {
    Dataset d;
    d.labels = {"neg", "pos"};
    d.rows.reserve(size);
    const auto span = s.max_words - s.min_words + 1;
    for (std::size_t i = 0; i < size; ++i) {
        const int cls = static_cast<int>(i % 2);
        const auto len = s.min_words + rng.uniform_index(span);
        std::string text;
        for (std::size_t w = 0; w < len; ++w) {
            if (w) text += ' ';
            text += word(cls, rng.uniform_index(s.vocabulary));
        }
        d.rows.push_back({std::move(text), std::nullopt, cls});
    }
    return d;
}

}  // namespace

TwoClusterTask make_two_cluster_task(const TwoClusterSettings& s, std::uint64_t seed) {
    if (s.vocabulary == 0 || s.min_words == 0 || s.max_words < s.min_words) {
        throw ConfigError("invalid two-cluster settings");
    }
    if (s.train_size < 4 || s.dev_size < 2) throw ConfigError("two-cluster splits are too small");
    Rng train_rng(mix_seed(seed, 1));
    Rng dev_rng(mix_seed(seed, 2));
    return {make_split(s, s.train_size, train_rng), make_split(s, s.dev_size, dev_rng)};
}

void write_tsv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << (data.kind == TaskKind::pair ? "sentence1\tsentence2\tlabel\n" : "sentence\tlabel\n");
    for (const auto& row : data.rows) {
        out << row.text;
        if (row.text2) out << '\t' << *row.text2;
        out << '\t' << data.labels.at(static_cast<std::size_t>(row.label)) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace paretoscl
