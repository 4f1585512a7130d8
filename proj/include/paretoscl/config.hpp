#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paretoscl/adamw.hpp"
#include "paretoscl/dataset.hpp"
#include "paretoscl/moo.hpp"
#include "paretoscl/paretolab.hpp"
#include "paretoscl/vectorizer.hpp"

namespace paretoscl {

enum class TrainMode { ce, ce_ls, ce_epo };

TrainMode parse_train_mode(const std::string& name);
const char* to_string(TrainMode mode) noexcept;

struct DataConfig {
    std::filesystem::path train;
    std::filesystem::path dev;
    TsvSchema schema;
};

struct SweepGrid {
    std::vector<double> tau{0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> lambda{0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> r1{0.1, 0.3, 0.5};
};

struct ToyConfig {
    ToySolver solver = ToySolver::epo;
    std::size_t dim = 20;
    long steps = 2000;
    double step_size = 0.05;
    std::uint64_t init_seed = 0;
    double init_radius = 2.0;
};

struct GradcheckConfig {
    std::size_t batches = 20;
    std::size_t probes = 50;
    double fd_step = 1e-5;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
    std::size_t hash_dim = 64;
    std::size_t hidden = 16;
    std::size_t embedding_dim = 8;
};

/// Everything that affects an experiment. Built from a config file plus
/// `key=value` overrides by `ConfigStore::resolve`.
struct RunConfig {
    TrainMode mode = TrainMode::ce_epo;
    double tau = 0.3;
    double lambda = 0.3;
    PreferenceVector r{0.1, 0.9};
    double epsilon_balance = 1e-5;

    AdamWSettings optimizer{};
    std::size_t batch_size = 16;

    VectorizerSettings vectorizer{};
    std::size_t hidden = 256;
    std::size_t embedding_dim = 64;
    double dropout = 0.1;

    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t fewshot_n = 20;  // 0 → full-data protocol
    std::size_t epochs = 30;
    std::size_t eval_interval = 2;
    std::size_t workers = 1;
    bool dump_embeddings = false;

    DataConfig data;
    SweepGrid sweep;
    ToyConfig toy;
    GradcheckConfig gradcheck;
};

/// Flat key/value view of the configuration. Keys are "section.name"; every
/// name is unique, so overrides may use the bare name.
class ConfigStore {
public:
    /// All keys at their defaults.
    ConfigStore();

    /// Reads an INI file on top of the defaults. Unknown keys are errors.
    static ConfigStore from_file(const std::filesystem::path& path);

    /// Applies `key=value`; key may be bare ("tau") or qualified ("objective.tau").
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;

    /// Parses and validates every key; errors name the offending key.
    RunConfig resolve() const;

    /// Canonical INI text of all keys in schema order.
    std::string dump() const;

    /// Digest of `dump()`.
    std::string digest() const;

private:
    std::string qualify(const std::string& key) const;

    std::map<std::string, std::string> m_values;
};

/// Canonical description of a resolved config (used for digests).
std::string describe(const RunConfig& config);
std::string config_digest(const RunConfig& config);

/// Documentation of every key: (qualified key, default, description).
struct ConfigKeyDoc {
    std::string key;
    std::string default_value;
    std::string help;
};
const std::vector<ConfigKeyDoc>& config_schema();

}  // namespace paretoscl
