#include "paretoscl/encoder.hpp"

#include <string>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMajor>;
using MutMat = Eigen::Map<RowMajor>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

ConstMat mat(const ParamVector& p, std::string_view name) {
    const auto& seg = p.layout.segment(name);
    return ConstMat(p.values.data() + seg.offset, static_cast<Eigen::Index>(seg.shape[0]),
                    static_cast<Eigen::Index>(seg.shape[1]));
}

ConstVec vec(const ParamVector& p, std::string_view name) {
    const auto& seg = p.layout.segment(name);
    return ConstVec(p.values.data() + seg.offset, static_cast<Eigen::Index>(seg.shape[0]));
}

MutMat mat(std::span<double> g, const ParamLayout& layout, std::string_view name) {
    const auto& seg = layout.segment(name);
    return MutMat(g.data() + seg.offset, static_cast<Eigen::Index>(seg.shape[0]),
                  static_cast<Eigen::Index>(seg.shape[1]));
}

MutVec vec(std::span<double> g, const ParamLayout& layout, std::string_view name) {
    const auto& seg = layout.segment(name);
    return MutVec(g.data() + seg.offset, static_cast<Eigen::Index>(seg.shape[0]));
}

}  // namespace

Encoder::Encoder(EncoderShape shape) : m_shape(shape) {
    if (shape.hash_dim < 2 || shape.hidden == 0 || shape.embedding_dim == 0) {
        throw ConfigError("encoder dimensions must be positive (hash_dim >= 2)");
    }
    if (shape.classes < 2) throw ConfigError("encoder needs at least two classes");
    if (!(shape.dropout >= 0.0 && shape.dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)", "dropout");
    m_layout.add("hidden.weight", {shape.hash_dim, shape.hidden})
        .add("hidden.bias", {shape.hidden})
        .add("embed.weight", {shape.hidden, shape.embedding_dim})
        .add("embed.bias", {shape.embedding_dim})
        .add("classify.weight", {shape.hidden, shape.classes})
        .add("classify.bias", {shape.classes});
}

void Encoder::check_params(const ParamVector& params) const {
    if (!(params.layout == m_layout) || params.values.size() != m_layout.total_size()) {
        throw ContractViolation("parameter layout does not match the encoder architecture");
    }
}

Eigen::VectorXd Encoder::dropout_mask(std::uint64_t seed) const {
    const auto h = static_cast<Eigen::Index>(m_shape.hidden);
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(h);
    if (m_shape.dropout == 0.0) return mask;
    const double keep = 1.0 - m_shape.dropout;
    Rng rng(seed);
    for (Eigen::Index j = 0; j < h; ++j) mask[j] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    return mask;
}

EncoderOutput Encoder::forward(const FeatureVector& feat, const ParamVector& params, bool train_mode,
                               std::uint64_t dropout_seed) const {
    check_params(params);
    if (feat.dim != m_shape.hash_dim) throw ContractViolation("feature dimension does not match encoder");

    const auto w1 = mat(params, "hidden.weight");
    EncoderOutput out;
    auto& cache = out.cache;
    cache.features = feat;
    cache.train_mode = train_mode;
    cache.dropout_seed = dropout_seed;

    cache.pre_activation = vec(params, "hidden.bias");
    for (std::size_t k = 0; k < feat.indices.size(); ++k) {
        cache.pre_activation += feat.weights[k] * w1.row(feat.indices[k]).transpose();
    }
    cache.hidden = cache.pre_activation.cwiseMax(0.0);
    if (train_mode) cache.hidden = cache.hidden.cwiseProduct(dropout_mask(dropout_seed));

    const Eigen::VectorXd raw =
        mat(params, "embed.weight").transpose() * cache.hidden + vec(params, "embed.bias");
    cache.raw_norm = raw.norm();
    if (!(cache.raw_norm >= 1e-12)) {
        throw DegenerateEmbedding("embedding norm " + std::to_string(cache.raw_norm) +
                                  " is below 1e-12; cannot normalise");
    }
    cache.embedding = raw / cache.raw_norm;

    out.embedding = cache.embedding;
    out.logits = mat(params, "classify.weight").transpose() * cache.hidden + vec(params, "classify.bias");
    return out;
}

Eigen::VectorXd Encoder::predict_logits(const FeatureVector& feat, const ParamVector& params) const {
    check_params(params);
    if (feat.dim != m_shape.hash_dim) throw ContractViolation("feature dimension does not match encoder");
    const auto w1 = mat(params, "hidden.weight");
    Eigen::VectorXd z = vec(params, "hidden.bias");
    for (std::size_t k = 0; k < feat.indices.size(); ++k) z += feat.weights[k] * w1.row(feat.indices[k]).transpose();
    z = z.cwiseMax(0.0);
    return mat(params, "classify.weight").transpose() * z + vec(params, "classify.bias");
}

void Encoder::backward_into(std::span<double> grad, std::span<const ForwardCache> caches,
                            const Eigen::MatrixXd& d_embedding, const Eigen::MatrixXd& d_logits,
                            const ParamVector& params) const {
    check_params(params);
    if (grad.size() != m_layout.total_size()) throw ContractViolation("gradient buffer length mismatch");
    const auto n = static_cast<Eigen::Index>(caches.size());
    const bool has_emb = d_embedding.rows() > 0;
    const bool has_log = d_logits.rows() > 0;
    if (has_emb && (d_embedding.rows() != n || d_embedding.cols() != static_cast<Eigen::Index>(m_shape.embedding_dim))) {
        throw ContractViolation("d_embedding shape does not match the batch");
    }
    if (has_log && (d_logits.rows() != n || d_logits.cols() != static_cast<Eigen::Index>(m_shape.classes))) {
        throw ContractViolation("d_logits shape does not match the batch");
    }
    if (!has_emb && !has_log) return;

    const auto we = mat(params, "embed.weight");
    const auto wc = mat(params, "classify.weight");
    auto g_w1 = mat(grad, m_layout, "hidden.weight");
    auto g_b1 = vec(grad, m_layout, "hidden.bias");
    auto g_we = mat(grad, m_layout, "embed.weight");
    auto g_be = vec(grad, m_layout, "embed.bias");
    auto g_wc = mat(grad, m_layout, "classify.weight");
    auto g_bc = vec(grad, m_layout, "classify.bias");

    Eigen::VectorXd d_hidden(static_cast<Eigen::Index>(m_shape.hidden));
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto& c = caches[static_cast<std::size_t>(s)];
        if (c.features.dim != m_shape.hash_dim || c.hidden.size() != static_cast<Eigen::Index>(m_shape.hidden)) {
            throw ContractViolation("forward cache does not come from this encoder");
        }
        d_hidden.setZero();
        if (has_emb) {
            const Eigen::VectorXd up = d_embedding.row(s).transpose();
            // Jacobian of v ↦ v/‖v‖ is (I − h hᵀ)/‖v‖.
            const Eigen::VectorXd d_raw = (up - c.embedding * c.embedding.dot(up)) / c.raw_norm;
            g_we.noalias() += c.hidden * d_raw.transpose();
            g_be += d_raw;
            d_hidden.noalias() += we * d_raw;
        }
        if (has_log) {
            const Eigen::VectorXd up = d_logits.row(s).transpose();
            g_wc.noalias() += c.hidden * up.transpose();
            g_bc += up;
            d_hidden.noalias() += wc * up;
        }
        if (c.train_mode) d_hidden = d_hidden.cwiseProduct(dropout_mask(c.dropout_seed));
        for (Eigen::Index j = 0; j < d_hidden.size(); ++j) {
            if (!(c.pre_activation[j] > 0.0)) d_hidden[j] = 0.0;
        }
        g_b1 += d_hidden;
        for (std::size_t k = 0; k < c.features.indices.size(); ++k) {
            g_w1.row(c.features.indices[k]) += c.features.weights[k] * d_hidden.transpose();
        }
    }
}

std::vector<double> Encoder::backward(std::span<const ForwardCache> caches, const Eigen::MatrixXd& d_embedding,
                                      const Eigen::MatrixXd& d_logits, const ParamVector& params) const {
    std::vector<double> grad(m_layout.total_size(), 0.0);
    backward_into(grad, caches, d_embedding, d_logits, params);
    return grad;
}

}  // namespace paretoscl
