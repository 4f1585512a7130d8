#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "paretoscl/params.hpp"
#include "paretoscl/vectorizer.hpp"

namespace paretoscl {

/// hash-D → hidden-H (ReLU, inverted dropout) → { embedding-d (L2-normalised), logits-C }.
struct EncoderShape {
    std::size_t hash_dim = 16384;
    std::size_t hidden = 256;
    std::size_t embedding_dim = 64;
    std::size_t classes = 2;
    double dropout = 0.1;
};

struct ForwardCache {
    FeatureVector features;
    Eigen::VectorXd pre_activation;  // z = W1ᵀx + b1
    Eigen::VectorXd hidden;          // relu(z) ⊙ mask
    Eigen::VectorXd embedding;       // unit-norm h = v / ‖v‖
    double raw_norm = 0.0;           // ‖v‖
    bool train_mode = false;
    std::uint64_t dropout_seed = 0;
};

struct EncoderOutput {
    Eigen::VectorXd embedding;
    Eigen::VectorXd logits;
    ForwardCache cache;
};

class Encoder {
public:
    explicit Encoder(EncoderShape shape);

    const EncoderShape& shape() const noexcept { return m_shape; }
    const ParamLayout& layout() const noexcept { return m_layout; }

    ParamVector init(std::uint64_t seed) const { return init_params(m_layout, seed); }

    /// Inverted-dropout multipliers (0 or 1/keep) replayed from `seed`.
    Eigen::VectorXd dropout_mask(std::uint64_t seed) const;

    EncoderOutput forward(const FeatureVector& feat, const ParamVector& params, bool train_mode,
                          std::uint64_t dropout_seed = 0) const;

    /// Eval-mode logits only; never touches the embedding head.
    Eigen::VectorXd predict_logits(const FeatureVector& feat, const ParamVector& params) const;

    /// Accumulates ∂loss/∂θ into `grad` given upstream gradients w.r.t. the
    /// unit-norm embeddings (rows of d_embedding) and logits (rows of
    /// d_logits). A matrix with zero rows means "no upstream gradient".
    void backward_into(std::span<double> grad, std::span<const ForwardCache> caches,
                       const Eigen::MatrixXd& d_embedding, const Eigen::MatrixXd& d_logits,
                       const ParamVector& params) const;

    std::vector<double> backward(std::span<const ForwardCache> caches, const Eigen::MatrixXd& d_embedding,
                                 const Eigen::MatrixXd& d_logits, const ParamVector& params) const;

private:
    void check_params(const ParamVector& params) const;

    EncoderShape m_shape;
    ParamLayout m_layout;
};

}  // namespace paretoscl
