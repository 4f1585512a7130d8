#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace paretoscl {

/// Rows of one class inside a mini-batch: H_k (N_k × d), unit-norm rows.
struct ClassBlock {
    int label = 0;
    Eigen::MatrixXd rows;
    std::vector<std::size_t> ids;
};

struct ClassBlockedBatch {
    std::vector<ClassBlock> blocks;
    double tau = 1.0;

    std::size_t sample_count() const noexcept;
};

/// M^(k) = H_k H_kᵀ and N^(k) = [H_k H_k'ᵀ]_{k'≠k}, one entry per block.
struct SimilarityBlocks {
    std::vector<Eigen::MatrixXd> intra;
    std::vector<Eigen::MatrixXd> inter;
};

struct LossVector {
    double pos = 0.0;
    double neg = 0.0;
    double ce = 0.0;
};

/// A loss value plus its gradient w.r.t. every embedding row, laid out like
/// the batch blocks.
struct BlockLoss {
    double value = 0.0;
    std::vector<Eigen::MatrixXd> grads;
};

struct CrossEntropy {
    double value = 0.0;
    Eigen::MatrixXd d_logits;  // (softmax − one-hot) / batch
};

SimilarityBlocks similarity_blocks(const ClassBlockedBatch& batch);

/// −(1/C) Σ_k (1/N_k) Σ_i log[ (1/(N_k−1)) Σ_{p≠i} exp(M_ip / τ) ]
/// Blocks with zero rows are ignored; C counts the classes present.
/// `check_unit_rows` can be disabled for off-manifold finite differences.
BlockLoss loss_pos(const ClassBlockedBatch& batch, bool check_unit_rows = true);

/// +(1/C) Σ_k (1/N_k) Σ_i log[ (1/N̄_k) Σ_n exp(N_in / τ) ]
BlockLoss loss_neg(const ClassBlockedBatch& batch, bool check_unit_rows = true);

/// Mean of −log softmax(logits)[label]; rows of `logits` are samples.
CrossEntropy cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

/// (ℓ₁, ℓ₂) = (λ·pos + (1−λ)·ce, λ·neg + (1−λ)·ce)
std::pair<double, double> blended_objectives(const LossVector& loss, double lambda);

/// Reference implementation with explicit loops and no max-shift. Test oracle
/// only; returns pos and neg, ce left at 0.
LossVector naive_losses(const ClassBlockedBatch& batch, bool check_unit_rows = true);

}  // namespace paretoscl
