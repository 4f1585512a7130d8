#include "paretoscl/split.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <span>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

enum StreamTag : std::uint64_t { kQuota = 1, kClassDraw = 2, kDevDraw = 3, kFullDraw = 4 };

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

// First `k` entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

void write_ids(const std::filesystem::path& path, const std::vector<std::size_t>& ids) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (auto id : ids) out << id << '\n';
}

std::vector<std::size_t> read_ids(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::size_t> ids;
    std::size_t id = 0;
    while (in >> id) ids.push_back(id);
    if (!in.eof()) throw DataError("malformed id list " + path.string());
    return ids;
}

IdSource parse_source(const std::string& s) {
    if (s == "train") return IdSource::train;
    if (s == "dev") return IdSource::dev;
    throw DataError("unknown id source '" + s + "'");
}

}  // namespace

const char* to_string(IdSource source) noexcept { return source == IdSource::train ? "train" : "dev"; }

FewShotSplit make_fewshot_split(const Dataset& train, const Dataset& dev, std::size_t n, std::uint64_t seed) {
    const std::size_t classes = train.num_classes();
    if (classes < 2) throw DataError("training data must contain at least two classes");
    if (n < 2 * classes) {
        throw ConfigError("few-shot size " + std::to_string(n) + " is below 2·C = " + std::to_string(2 * classes),
                          "fewshot_n");
    }
    if (dev.size() < 2) throw DataError("dev set needs at least two rows to be halved");

    const auto by_class = train.ids_by_class();
    for (std::size_t k = 0; k < classes; ++k) {
        if (by_class[k].size() < 2) {
            throw DataError("class '" + train.labels[k] + "' has fewer than two training rows");
        }
    }

    // Balanced quotas; the remainder goes to a seeded rotation of classes.
    Rng quota_rng(mix_seed(seed, kQuota));
    const std::size_t start = static_cast<std::size_t>(quota_rng.uniform_index(classes));
    std::vector<std::size_t> quota(classes, n / classes);
    for (std::size_t i = 0; i < n % classes; ++i) ++quota[(start + i) % classes];

    // Classes too small for their quota give the deficit to the others.
    std::size_t deficit = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        if (quota[k] > by_class[k].size()) {
            deficit += quota[k] - by_class[k].size();
            quota[k] = by_class[k].size();
        }
    }
    for (std::size_t i = 0; deficit > 0 && i < classes; ++i) {
        const auto k = (start + i) % classes;
        const auto extra = std::min(deficit, by_class[k].size() - quota[k]);
        quota[k] += extra;
        deficit -= extra;
    }
    if (deficit > 0) throw DataError("training data has fewer than " + std::to_string(n) + " rows");

    FewShotSplit split;
    split.seed = seed;
    split.train_source = IdSource::train;
    split.validation_source = IdSource::dev;
    split.test_source = IdSource::dev;
    for (std::size_t k = 0; k < classes; ++k) {
        Rng rng(mix_seed(mix_seed(seed, kClassDraw), k));
        auto picked = draw_without_replacement(by_class[k], quota[k], rng);
        split.train.insert(split.train.end(), picked.begin(), picked.end());
    }
    std::sort(split.train.begin(), split.train.end());

    Rng dev_rng(mix_seed(seed, kDevDraw));
    const std::size_t sampled = std::min<std::size_t>(500, dev.size());
    auto pool = draw_without_replacement(iota(dev.size()), sampled, dev_rng);
    const std::size_t half = sampled / 2;
    split.test.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(half));
    split.validation.assign(pool.begin() + static_cast<std::ptrdiff_t>(half), pool.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

FewShotSplit make_full_split(const Dataset& train, const Dataset& dev, std::uint64_t seed) {
    if (train.size() < 10) throw DataError("full-data split needs at least 10 training rows");
    if (dev.size() == 0) throw DataError("dev set is empty");

    Rng rng(mix_seed(seed, kFullDraw));
    const std::size_t n_val = train.size() / 10;
    auto order = draw_without_replacement(iota(train.size()), train.size(), rng);

    FewShotSplit split;
    split.seed = seed;
    split.train_source = IdSource::train;
    split.validation_source = IdSource::train;
    split.test_source = IdSource::dev;
    split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    split.test = iota(dev.size());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

void write_split_manifest(const std::filesystem::path& dir, const std::string& stem, const FewShotSplit& split) {
    std::filesystem::create_directories(dir);
    write_ids(dir / (stem + ".train.ids"), split.train);
    write_ids(dir / (stem + ".validation.ids"), split.validation);
    write_ids(dir / (stem + ".test.ids"), split.test);
    nlohmann::ordered_json meta;
    meta["schema"] = "paretoscl.split/1";
    meta["seed"] = split.seed;
    meta["train_source"] = to_string(split.train_source);
    meta["validation_source"] = to_string(split.validation_source);
    meta["test_source"] = to_string(split.test_source);
    meta["sizes"] = {{"train", split.train.size()},
                     {"validation", split.validation.size()},
                     {"test", split.test.size()}};
    std::ofstream out(dir / (stem + ".split.json"), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write split manifest in " + dir.string());
    out << meta.dump(2) << '\n';
}

FewShotSplit read_split_manifest(const std::filesystem::path& dir, const std::string& stem) {
    std::ifstream in(dir / (stem + ".split.json"));
    if (!in) throw IoError("cannot read split manifest " + (dir / (stem + ".split.json")).string());
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed split manifest: ") + e.what());
    }
    FewShotSplit split;
    split.seed = meta.at("seed").get<std::uint64_t>();
    split.train_source = parse_source(meta.at("train_source").get<std::string>());
    split.validation_source = parse_source(meta.at("validation_source").get<std::string>());
    split.test_source = parse_source(meta.at("test_source").get<std::string>());
    split.train = read_ids(dir / (stem + ".train.ids"));
    split.validation = read_ids(dir / (stem + ".validation.ids"));
    split.test = read_ids(dir / (stem + ".test.ids"));
    return split;
}

}  // namespace paretoscl
