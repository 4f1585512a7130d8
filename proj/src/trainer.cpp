#include "paretoscl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "paretoscl/errors.hpp"
#include "paretoscl/moo.hpp"
#include "paretoscl/parallel.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;     // "init"
constexpr std::uint64_t kBatchStream = 0x62617463;    // "batc"
constexpr std::uint64_t kDropoutStream = 0x64726f70;  // "drop"

std::vector<FeatureVector> featurize(const Dataset& d, const VectorizerSettings& s) {
    std::vector<FeatureVector> out;
    out.reserve(d.size());
    for (const auto& row : d.rows) out.push_back(vectorize(row.text, row.text2, s));
    return out;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace

PreparedData prepare_data(Dataset train, Dataset dev, const VectorizerSettings& settings) {
    train.validate();
    dev.validate();
    if (train.labels != dev.labels) {
        // dev labels must be a prefix-compatible subset of the train label order
        for (std::size_t i = 0; i < dev.labels.size(); ++i) {
            if (i >= train.labels.size() || dev.labels[i] != train.labels[i]) {
                throw DataError("train and dev label orders differ; configure an explicit label list");
            }
        }
        dev.labels = train.labels;
    }
    if (train.kind != dev.kind) throw DataError("train and dev files disagree on single/pair task kind");
    PreparedData out;
    out.train_features = featurize(train, settings);
    out.dev_features = featurize(dev, settings);
    std::uint64_t h = fnv1a64_u64(train.digest());
    h = fnv1a64_u64(dev.digest(), h);
    h = fnv1a64_u64(settings.hash_dim, h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(settings.ngram_max), h);
    h = fnv1a64_u64(settings.hash_seed, h);
    out.digest = hex_digest(h);
    out.train = std::move(train);
    out.dev = std::move(dev);
    return out;
}

PreparedData load_data(const RunConfig& config) {
    if (config.data.train.empty()) throw ConfigError("train: no training file configured", "train");
    if (config.data.dev.empty()) throw ConfigError("dev: no dev file configured", "dev");
    auto schema = config.data.schema;
    auto train = load_tsv(config.data.train, schema);
    if (schema.labels.empty()) schema.labels = train.labels;  // dev follows the train label order
    auto dev = load_tsv(config.data.dev, schema);
    if (train.num_classes() < 2) throw DataError("training data has fewer than two classes");
    return prepare_data(std::move(train), std::move(dev), config.vectorizer);
}

EncoderShape encoder_shape(const RunConfig& config, std::size_t classes) {
    EncoderShape s;
    s.hash_dim = config.vectorizer.hash_dim;
    s.hidden = config.hidden;
    s.embedding_dim = config.embedding_dim;
    s.classes = classes;
    s.dropout = config.dropout;
    return s;
}

namespace {

struct BatchForward {
    std::vector<ForwardCache> caches;
    Eigen::MatrixXd logits;
    std::vector<int> labels;
    ClassBlockedBatch blocked;
};

BatchForward forward_batch(const Encoder& encoder, const ParamVector& params, const ClassBatchIds& batch,
                           std::span<const FeatureVector> features, double tau, std::uint64_t dropout_seed) {
    const auto total = batch.total();
    const auto d = static_cast<Eigen::Index>(encoder.shape().embedding_dim);
    const auto classes = static_cast<Eigen::Index>(encoder.shape().classes);
    if (batch.per_class.size() != encoder.shape().classes) {
        throw BatchShapeError("batch has " + std::to_string(batch.per_class.size()) + " class blocks, model has " +
                              std::to_string(encoder.shape().classes) + " classes");
    }
    BatchForward f;
    f.caches.reserve(total);
    f.logits.resize(static_cast<Eigen::Index>(total), classes);
    f.labels.reserve(total);
    f.blocked.tau = tau;
    std::size_t p = 0;
    for (std::size_t k = 0; k < batch.per_class.size(); ++k) {
        const auto& ids = batch.per_class[k];
        ClassBlock block;
        block.label = static_cast<int>(k);
        block.rows.resize(static_cast<Eigen::Index>(ids.size()), d);
        for (std::size_t i = 0; i < ids.size(); ++i, ++p) {
            if (ids[i] >= features.size()) throw ContractViolation("batch id out of range");
            auto out = encoder.forward(features[ids[i]], params, true, mix_seed(dropout_seed, p));
            block.rows.row(static_cast<Eigen::Index>(i)) = out.embedding.transpose();
            f.logits.row(static_cast<Eigen::Index>(p)) = out.logits.transpose();
            f.labels.push_back(static_cast<int>(k));
            block.ids.push_back(ids[i]);
            f.caches.push_back(std::move(out.cache));
        }
        f.blocked.blocks.push_back(std::move(block));
    }
    return f;
}

}  // namespace

LossVector compute_losses(const Encoder& encoder, const ParamVector& params, const ClassBatchIds& batch,
                          std::span<const FeatureVector> features, double tau, std::uint64_t dropout_seed) {
    const auto f = forward_batch(encoder, params, batch, features, tau, dropout_seed);
    return {loss_pos(f.blocked).value, loss_neg(f.blocked).value, cross_entropy(f.logits, f.labels).value};
}

std::vector<double> densify(std::span<const std::size_t> support, std::span<const double> values,
                            std::size_t total) {
    if (support.size() != values.size()) throw ContractViolation("support/value length mismatch");
    std::vector<double> out(total, 0.0);
    for (std::size_t k = 0; k < support.size(); ++k) out.at(support[k]) = values[k];
    return out;
}

ObjectiveGradients compute_gradients(const Encoder& encoder, const ParamVector& params, const ClassBatchIds& batch,
                                     std::span<const FeatureVector> features, double tau,
                                     std::uint64_t dropout_seed) {
    const auto f = forward_batch(encoder, params, batch, features, tau, dropout_seed);
    const auto pos = loss_pos(f.blocked);
    const auto neg = loss_neg(f.blocked);
    const auto ce = cross_entropy(f.logits, f.labels);

    const auto total = static_cast<Eigen::Index>(batch.total());
    const auto d = static_cast<Eigen::Index>(encoder.shape().embedding_dim);
    auto stack = [&](const BlockLoss& l) {
        Eigen::MatrixXd m(total, d);
        Eigen::Index row = 0;
        for (const auto& g : l.grads) {
            m.middleRows(row, g.rows()) = g;
            row += g.rows();
        }
        return m;
    };
    const Eigen::MatrixXd none(0, 0);

    ObjectiveGradients out;
    out.loss = {pos.value, neg.value, ce.value};

    const auto& layout = encoder.layout();
    const auto& w1 = layout.segment("hidden.weight");
    std::vector<std::uint32_t> rows;
    for (const auto& c : f.caches) rows.insert(rows.end(), c.features.indices.begin(), c.features.indices.end());
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    const auto hidden = encoder.shape().hidden;
    const auto rest_begin = w1.offset + w1.size();
    out.support.reserve(rows.size() * hidden + (layout.total_size() - rest_begin));
    for (const auto r : rows) {
        for (std::size_t j = 0; j < hidden; ++j) out.support.push_back(w1.offset + r * hidden + j);
    }
    for (std::size_t i = rest_begin; i < layout.total_size(); ++i) out.support.push_back(i);

    // Backward writes only support entries, so the scratch buffer is restored by
    // zeroing those after each gather.
    thread_local std::vector<double> scratch;
    if (scratch.size() != layout.total_size()) scratch.assign(layout.total_size(), 0.0);
    auto run = [&](const Eigen::MatrixXd& d_emb, const Eigen::MatrixXd& d_log) {
        std::vector<double> compact(out.support.size());
        try {
            encoder.backward_into(scratch, f.caches, d_emb, d_log, params);
        } catch (...) {
            scratch.assign(layout.total_size(), 0.0);
            throw;
        }
        for (std::size_t k = 0; k < out.support.size(); ++k) {
            compact[k] = scratch[out.support[k]];
            scratch[out.support[k]] = 0.0;
        }
        return compact;
    };
    out.pos = run(stack(pos), none);
    out.neg = run(stack(neg), none);
    out.ce = run(none, ce.d_logits);
    return out;
}

CombinedGradient combine_gradients(const ObjectiveGradients& g, const RunConfig& config) {
    const auto n = g.ce.size();
    const double lam = config.lambda;
    CombinedGradient out;
    out.gradient.resize(n);
    switch (config.mode) {
        case TrainMode::ce:
            out.gradient = g.ce;
            out.weight_mode = "ce";
            return out;
        case TrainMode::ce_ls: {
            const double r1 = config.r[0];
            const double r2 = config.r[1];
            for (std::size_t i = 0; i < n; ++i) {
                out.gradient[i] = lam * (r1 * g.pos[i] + r2 * g.neg[i]) + (1.0 - lam) * g.ce[i];
            }
            out.weights = {r1, r2};
            out.weight_mode = "ls";
            return out;
        }
        case TrainMode::ce_epo: {
            // ℓ_pos ≥ −1/τ and ℓ_neg ≥ −1/τ, so the shift makes both non-negative.
            const double shift = 1.0 / config.tau;
            const ObjectivePoint shifted{std::max(0.0, g.loss.pos + shift), std::max(0.0, g.loss.neg + shift)};
            const auto w = epo_weights(shifted, g.pos, g.neg, config.r, config.epsilon_balance);
            out.weights = w.beta;
            out.weight_mode = to_string(w.mode);
            std::vector<double> contrastive(n);
            for (std::size_t i = 0; i < n; ++i) contrastive[i] = lam * (w.beta[0] * g.pos[i] + w.beta[1] * g.neg[i]);
            out.ce_only = norm(contrastive) < 1e-12;
            for (std::size_t i = 0; i < n; ++i) {
                out.gradient[i] = (out.ce_only ? 0.0 : contrastive[i]) + (1.0 - lam) * g.ce[i];
            }
            return out;
        }
    }
    return out;
}

StepOutcome train_step(const Encoder& encoder, ParamVector& params, OptimizerState& state,
                       const ClassBatchIds& batch, std::span<const FeatureVector> features,
                       const RunConfig& config, std::uint64_t dropout_seed, long step_index) {
    const auto grads = compute_gradients(encoder, params, batch, features, config.tau, dropout_seed);
    const auto& l = grads.loss;
    if (!std::isfinite(l.pos) || !std::isfinite(l.neg) || !std::isfinite(l.ce)) {
        throw NumericError("non-finite loss at step " + std::to_string(step_index));
    }
    const auto combined = combine_gradients(grads, config);
    adamw_step_sparse(params, grads.support, combined.gradient, state);
    return {grads.loss, combined.weights, combined.weight_mode, combined.ce_only};
}

double evaluate(const Encoder& encoder, const ParamVector& params, std::span<const std::size_t> ids,
                std::span<const FeatureVector> features, const Dataset& dataset) {
    if (ids.empty()) throw ContractViolation("evaluate needs at least one id");
    std::size_t correct = 0;
    for (const auto id : ids) {
        const auto logits = encoder.predict_logits(features[id], params);
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.size(); ++c) {
            if (logits[c] > logits[best]) best = c;
        }
        if (best == dataset.rows.at(id).label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

Eigen::MatrixXd embed(const Encoder& encoder, const ParamVector& params, std::span<const std::size_t> ids,
                      std::span<const FeatureVector> features) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()),
                        static_cast<Eigen::Index>(encoder.shape().embedding_dim));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = encoder.forward(features[ids[i]], params, false).embedding.transpose();
    }
    return out;
}

FewShotSplit make_split(const RunConfig& config, const PreparedData& data, std::uint64_t seed) {
    return config.fewshot_n > 0 ? make_fewshot_split(data.train, data.dev, config.fewshot_n, seed)
                                : make_full_split(data.train, data.dev, seed);
}

SeedResult run_seed(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
                    std::vector<StepRecord>* trace, const SeedSink& sink) {
    SeedResult result;
    result.seed = seed;
    try {
        result.split = make_split(config, data, seed);
        const auto& split = result.split;
        const Encoder encoder(encoder_shape(config, data.train.num_classes()));
        auto params = encoder.init(mix_seed(seed, kInitStream));
        auto state = OptimizerState::for_params(params, config.optimizer);
        const auto by_class = data.dataset(split.train_source).ids_by_class(split.train);
        const auto& train_features = data.features(split.train_source);

        const auto steps_per_epoch =
            std::max<std::size_t>(1, (split.train.size() + config.batch_size - 1) / config.batch_size);
        const auto total = static_cast<long>(steps_per_epoch * config.epochs);
        const auto batch_stream = mix_seed(seed, kBatchStream);
        const auto dropout_stream = mix_seed(seed, kDropoutStream);

        ParamVector best = params;
        double best_val = -1.0;
        for (long step = 0; step < total; ++step) {
            const auto s = static_cast<std::uint64_t>(step);
            const auto batch = sample_class_batch(by_class, config.batch_size, mix_seed(batch_stream, s));
            const auto outcome = train_step(encoder, params, state, batch, train_features, config,
                                            mix_seed(dropout_stream, s), step + 1);
            StepRecord rec{seed, step + 1, outcome.loss, outcome.weights, outcome.weight_mode, outcome.ce_only, {}};
            if ((step + 1) % static_cast<long>(config.eval_interval) == 0 || step + 1 == total) {
                const double val = evaluate(encoder, params, split.validation,
                                            data.features(split.validation_source),
                                            data.dataset(split.validation_source));
                rec.validation_accuracy = val;
                if (val > best_val) {
                    best_val = val;
                    best = params;
                    result.best_step = step + 1;
                }
            }
            if (trace) trace->push_back(std::move(rec));
        }
        result.best_validation_accuracy = best_val;
        result.test_accuracy = evaluate(encoder, best, split.test, data.features(split.test_source),
                                        data.dataset(split.test_source));
        result.ok = true;
        if (sink) result.checkpoint = sink(result, encoder, best);
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    return result;
}

RunReport run_experiment(const RunConfig& config, const PreparedData& data, const RunOptions& options) {
    const auto classes = data.train.num_classes();
    if (classes < 2) throw DataError("training data has fewer than two classes");
    if (config.batch_size < 2 * classes) {
        throw ConfigError("batch_size: must be at least 2 per class (" + std::to_string(2 * classes) + ")",
                          "batch_size");
    }
    if (config.fewshot_n > 0 && config.fewshot_n < 2 * classes) {
        throw ConfigError("fewshot_n: must be at least 2 per class (" + std::to_string(2 * classes) + ")",
                          "fewshot_n");
    }
    if (config.mode == TrainMode::ce_epo) config.r.require_strictly_positive();

    RunReport report;
    report.mode = to_string(config.mode);
    report.config_digest = config_digest(config);
    report.dataset_digest = data.digest;
    const auto n = config.seeds.size();
    report.seeds.resize(n);
    std::vector<std::vector<StepRecord>> traces(n);
    parallel_for(n, config.workers, [&](std::size_t i) {
        report.seeds[i] = run_seed(config, data, config.seeds[i], options.record_trace ? &traces[i] : nullptr,
                                   options.on_seed_done);
    });
    for (auto& t : traces) {
        report.trace.insert(report.trace.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }

    std::vector<double> acc;
    double val_sum = 0.0;
    for (const auto& s : report.seeds) {
        if (!s.ok) continue;
        acc.push_back(s.test_accuracy);
        val_sum += s.best_validation_accuracy;
    }
    report.completed = acc.size();
    if (!acc.empty()) {
        double sum = 0.0;
        for (double a : acc) sum += a;
        report.mean = sum / static_cast<double>(acc.size());
        report.validation_mean = val_sum / static_cast<double>(acc.size());
        if (acc.size() > 1) {
            double ss = 0.0;
            for (double a : acc) ss += (a - report.mean) * (a - report.mean);
            report.std = std::sqrt(ss / static_cast<double>(acc.size() - 1));
        }
    }
    if (n == 1) report.flags.push_back("single seed");
    if (report.completed < n) {
        std::ostringstream os;
        os << "partial: " << (n - report.completed) << " of " << n << " seeds failed";
        report.flags.push_back(os.str());
    }
    if (report.completed == 1 && n > 1) report.flags.push_back("single completed seed");
    return report;
}

SweepReport sweep(const RunConfig& base, const PreparedData& data) {
    const bool uses_r = base.mode != TrainMode::ce;
    if (base.sweep.tau.empty() || base.sweep.lambda.empty() || (uses_r && base.sweep.r1.empty())) {
        throw ConfigError("sweep grids must not be empty");
    }
    std::vector<RunConfig> configs;
    SweepReport report;
    report.mode = to_string(base.mode);
    report.dataset_digest = data.digest;
    for (double tau : base.sweep.tau) {
        for (double lambda : base.sweep.lambda) {
            const auto r_count = uses_r ? base.sweep.r1.size() : 1;
            for (std::size_t ri = 0; ri < r_count; ++ri) {
                RunConfig c = base;
                c.tau = tau;
                c.lambda = lambda;
                SweepCell cell;
                cell.tau = tau;
                cell.lambda = lambda;
                if (uses_r) {
                    c.r = PreferenceVector::from_first(base.sweep.r1[ri]);
                    cell.r1 = base.sweep.r1[ri];
                }
                c.workers = 1;
                cell.config_digest = config_digest(c);
                configs.push_back(std::move(c));
                report.cells.push_back(std::move(cell));
            }
        }
    }
    parallel_for(configs.size(), base.workers, [&](std::size_t i) {
        auto& cell = report.cells[i];
        try {
            const auto run = run_experiment(configs[i], data, RunOptions{false, {}});
            cell.completed = run.completed;
            cell.validation_mean = run.validation_mean;
            cell.test_mean = run.mean;
            cell.test_std = run.std;
            cell.ok = run.completed == configs[i].seeds.size();
            if (!cell.ok) {
                for (const auto& s : run.seeds) {
                    if (!s.ok) {
                        cell.error = "seed " + std::to_string(s.seed) + ": " + s.error;
                        break;
                    }
                }
            }
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
    });
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        if (!report.cells[i].ok) continue;
        if (!report.best || report.cells[i].validation_mean > report.cells[*report.best].validation_mean) {
            report.best = i;
        }
    }
    report.best_config = report.best ? configs[*report.best] : base;
    report.best_config.workers = base.workers;
    return report;
}

}  // namespace paretoscl
