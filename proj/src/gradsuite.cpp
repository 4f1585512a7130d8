#include "paretoscl/gradsuite.hpp"

#include <algorithm>
#include <numeric>

#include "paretoscl/encoder.hpp"
#include "paretoscl/rng.hpp"
#include "paretoscl/trainer.hpp"

namespace paretoscl {

namespace {

FeatureVector random_features(std::uint32_t dim, Rng& rng) {
    const auto nnz = std::min<std::uint64_t>(dim, 3 + rng.uniform_index(6));
    std::vector<std::uint32_t> idx(dim);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::uint64_t i = 0; i < nnz; ++i) {
        const auto j = i + rng.uniform_index(dim - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(nnz);
    std::sort(idx.begin(), idx.end());
    FeatureVector f;
    f.dim = dim;
    f.indices = idx;
    double ss = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        f.weights.push_back(rng.uniform(0.2, 1.0));
        ss += f.weights.back() * f.weights.back();
    }
    for (auto& w : f.weights) w /= std::sqrt(ss);
    return f;
}

}  // namespace

bool GradSuiteResult::passed() const noexcept {
    return std::all_of(losses.begin(), losses.end(),
                       [&](const LossCheck& l) { return l.worst.max_rel_error < tolerance; });
}

GradSuiteResult run_gradient_suite(const GradcheckConfig& config, double tau, double lambda) {
    GradSuiteResult result;
    result.batches = config.batches;
    result.tolerance = config.tolerance;
    const char* names[] = {"pos", "neg", "ce", "blend1", "blend2"};
    for (const char* n : names) result.losses.push_back({n, {}, 0});

    for (std::size_t b = 0; b < config.batches; ++b) {
        Rng rng(mix_seed(config.seed, b));
        const std::size_t classes = 2 + rng.uniform_index(2);
        EncoderShape shape;
        shape.hash_dim = config.hash_dim;
        shape.hidden = config.hidden;
        shape.embedding_dim = config.embedding_dim;
        shape.classes = classes;
        shape.dropout = 0.1;
        const Encoder encoder(shape);
        auto params = encoder.init(rng.next_u64());
        for (auto& v : params.values) v += 0.1 * rng.normal();

        std::vector<FeatureVector> features;
        ClassBatchIds batch;
        batch.per_class.resize(classes);
        for (std::size_t k = 0; k < classes; ++k) {
            const auto nk = 2 + rng.uniform_index(4);
            for (std::uint64_t i = 0; i < nk; ++i) {
                batch.per_class[k].push_back(features.size());
                features.push_back(random_features(static_cast<std::uint32_t>(config.hash_dim), rng));
            }
        }
        const auto dropout_seed = rng.next_u64();

        const auto grads = compute_gradients(encoder, params, batch, features, tau, dropout_seed);
        const auto total = params.size();
        const auto pos = densify(grads.support, grads.pos, total);
        const auto neg = densify(grads.support, grads.neg, total);
        const auto ce = densify(grads.support, grads.ce, total);
        std::vector<double> blend1(total), blend2(total);
        for (std::size_t i = 0; i < total; ++i) {
            blend1[i] = lambda * pos[i] + (1.0 - lambda) * ce[i];
            blend2[i] = lambda * neg[i] + (1.0 - lambda) * ce[i];
        }
        const std::vector<double>* analytic[] = {&pos, &neg, &ce, &blend1, &blend2};
        auto losses = [&](const ParamVector& p) {
            return compute_losses(encoder, p, batch, features, tau, dropout_seed);
        };
        const ScalarObjective objectives[] = {
            [&](const ParamVector& p) { return losses(p).pos; },
            [&](const ParamVector& p) { return losses(p).neg; },
            [&](const ParamVector& p) { return losses(p).ce; },
            [&](const ParamVector& p) {
                const auto l = losses(p);
                return lambda * l.pos + (1.0 - lambda) * l.ce;
            },
            [&](const ParamVector& p) {
                const auto l = losses(p);
                return lambda * l.neg + (1.0 - lambda) * l.ce;
            },
        };
        for (std::size_t j = 0; j < 5; ++j) {
            const auto r = finite_diff_check(objectives[j], params, *analytic[j], config.probes, config.fd_step,
                                             mix_seed(dropout_seed, j));
            auto& agg = result.losses[j];
            agg.probes += r.probes;
            if (r.max_rel_error >= agg.worst.max_rel_error) agg.worst = r;
        }
    }
    return result;
}

}  // namespace paretoscl
