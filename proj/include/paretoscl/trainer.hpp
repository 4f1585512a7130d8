#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paretoscl/adamw.hpp"
#include "paretoscl/config.hpp"
#include "paretoscl/contrastive.hpp"
#include "paretoscl/dataset.hpp"
#include "paretoscl/encoder.hpp"
#include "paretoscl/sampler.hpp"
#include "paretoscl/split.hpp"

namespace paretoscl {

/// Train and dev datasets with their hashed features.
struct PreparedData {
    Dataset train;
    Dataset dev;
    std::vector<FeatureVector> train_features;
    std::vector<FeatureVector> dev_features;

    const Dataset& dataset(IdSource source) const { return source == IdSource::train ? train : dev; }
    const std::vector<FeatureVector>& features(IdSource source) const {
        return source == IdSource::train ? train_features : dev_features;
    }
    /// Digest over both datasets and the vectorizer settings used.
    std::string digest;
};

PreparedData prepare_data(Dataset train, Dataset dev, const VectorizerSettings& settings);

/// Loads `config.data.train` and `config.data.dev`; both must share the label map.
PreparedData load_data(const RunConfig& config);

EncoderShape encoder_shape(const RunConfig& config, std::size_t classes);

/// Losses and separately computed parameter gradients of one batch. Gradients are
/// stored on `support`: the first-layer rows hit by the batch's features followed by
/// every other parameter, as strictly increasing flat indices. Entries off the
/// support are exactly zero.
struct ObjectiveGradients {
    LossVector loss;
    std::vector<std::size_t> support;
    std::vector<double> pos;
    std::vector<double> neg;
    std::vector<double> ce;
};

/// Scatters support values into a dense vector of length `total`.
std::vector<double> densify(std::span<const std::size_t> support, std::span<const double> values, std::size_t total);

/// Train-mode losses of one batch without gradients.
LossVector compute_losses(const Encoder& encoder, const ParamVector& params, const ClassBatchIds& batch,
                          std::span<const FeatureVector> features, double tau, std::uint64_t dropout_seed);

/// Train-mode forward shared by all three objectives, then one backward pass each.
/// Sample p of the flattened batch uses dropout seed mix_seed(dropout_seed, p).
ObjectiveGradients compute_gradients(const Encoder& encoder, const ParamVector& params, const ClassBatchIds& batch,
                                     std::span<const FeatureVector> features, double tau,
                                     std::uint64_t dropout_seed);

/// Update direction on the same support as the inputs.
struct CombinedGradient {
    std::vector<double> gradient;
    std::array<double, 2> weights{0.0, 0.0};  // (r1, r2) for ls, β for epo, zeros for ce
    std::string weight_mode;                  // "ce", "ls", "balance" or "descent"
    bool ce_only = false;                     // contrastive direction vanished
};

CombinedGradient combine_gradients(const ObjectiveGradients& grads, const RunConfig& config);

struct StepOutcome {
    LossVector loss;
    std::array<double, 2> weights{0.0, 0.0};
    std::string weight_mode;
    bool ce_only = false;
};

/// One optimizer step. Non-finite losses raise NumericError naming `step_index`.
StepOutcome train_step(const Encoder& encoder, ParamVector& params, OptimizerState& state,
                       const ClassBatchIds& batch, std::span<const FeatureVector> features,
                       const RunConfig& config, std::uint64_t dropout_seed, long step_index);

/// Top-1 accuracy with eval-mode forward; ties go to the smaller class id.
double evaluate(const Encoder& encoder, const ParamVector& params, std::span<const std::size_t> ids,
                std::span<const FeatureVector> features, const Dataset& dataset);

/// Eval-mode embeddings, one row per id.
Eigen::MatrixXd embed(const Encoder& encoder, const ParamVector& params, std::span<const std::size_t> ids,
                      std::span<const FeatureVector> features);

struct StepRecord {
    std::uint64_t seed = 0;
    long step = 0;  // 1-based count of completed updates
    LossVector loss;
    std::array<double, 2> weights{0.0, 0.0};
    std::string weight_mode;
    bool ce_only = false;
    std::optional<double> validation_accuracy;
};

struct SeedResult {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double test_accuracy = 0.0;
    double best_validation_accuracy = 0.0;
    long best_step = 0;
    std::string checkpoint;
    FewShotSplit split;
};

struct RunReport {
    std::string mode;
    std::string config_digest;
    std::string dataset_digest;
    std::vector<SeedResult> seeds;
    std::vector<StepRecord> trace;
    double mean = 0.0;  // over completed seeds
    double std = 0.0;   // sample standard deviation; 0 for a single seed
    double validation_mean = 0.0;
    std::size_t completed = 0;
    std::vector<std::string> flags;  // "single seed", "partial: k of n seeds failed", ...
};

/// Receives each seed's best-validation parameters; returns the checkpoint reference to record.
using SeedSink = std::function<std::string(const SeedResult&, const Encoder&, const ParamVector&)>;

struct RunOptions {
    bool record_trace = true;
    SeedSink on_seed_done;
};

/// The split a seed uses: few-shot when `fewshot_n > 0`, full-data otherwise.
FewShotSplit make_split(const RunConfig& config, const PreparedData& data, std::uint64_t seed);

/// Trains one seed; errors are captured in the result.
SeedResult run_seed(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
                    std::vector<StepRecord>* trace, const SeedSink& sink = {});

/// All configured seeds, in parallel across `config.workers`.
RunReport run_experiment(const RunConfig& config, const PreparedData& data, const RunOptions& options = {});

struct SweepCell {
    double tau = 0.0;
    double lambda = 0.0;
    std::optional<double> r1;
    bool ok = false;
    std::string error;
    double validation_mean = 0.0;
    double test_mean = 0.0;
    double test_std = 0.0;
    std::size_t completed = 0;
    std::string config_digest;
};

struct SweepReport {
    std::string mode;
    std::string dataset_digest;
    std::vector<SweepCell> cells;  // τ-major, then λ, then r1
    std::optional<std::size_t> best;
    RunConfig best_config;
};

/// Cells iterate τ, then λ, then r1 (r1 only for ce_ls and ce_epo). A cell with any
/// failed seed is excluded; ties on validation mean go to the earlier cell.
SweepReport sweep(const RunConfig& base, const PreparedData& data);

}  // namespace paretoscl
