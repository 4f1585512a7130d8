#include "paretoscl/contrastive.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "paretoscl/errors.hpp"

namespace paretoscl {

namespace {

// Indices of blocks that take part (non-empty), after checking shape rules.
std::vector<std::size_t> active_blocks(const ClassBlockedBatch& batch, bool check_unit_rows) {
    if (!(batch.tau > 0.0) || !std::isfinite(batch.tau)) {
        throw ConfigError("temperature must be a positive finite number", "tau");
    }
    std::vector<std::size_t> active;
    Eigen::Index dim = -1;
    for (std::size_t k = 0; k < batch.blocks.size(); ++k) {
        const auto& rows = batch.blocks[k].rows;
        if (rows.rows() == 0) continue;
        if (rows.rows() < 2) {
            throw BatchShapeError("class " + std::to_string(batch.blocks[k].label) +
                                  " has a single sample; every present class needs N_k >= 2");
        }
        if (dim >= 0 && rows.cols() != dim) throw BatchShapeError("embedding blocks disagree on dimension");
        dim = rows.cols();
        if (check_unit_rows) {
            for (Eigen::Index i = 0; i < rows.rows(); ++i) {
                if (std::abs(rows.row(i).norm() - 1.0) > 1e-9) {
                    throw ContractViolation("embedding rows must be unit-norm (class " +
                                            std::to_string(batch.blocks[k].label) + ")");
                }
            }
        }
        active.push_back(k);
    }
    if (active.empty()) throw BatchShapeError("batch has no samples");
    return active;
}

std::vector<Eigen::MatrixXd> zero_grads(const ClassBlockedBatch& batch) {
    std::vector<Eigen::MatrixXd> g;
    g.reserve(batch.blocks.size());
    for (const auto& b : batch.blocks) g.push_back(Eigen::MatrixXd::Zero(b.rows.rows(), b.rows.cols()));
    return g;
}

// Row-wise log-sum-exp that skips the diagonal when `skip_diag` is set.
// Returns lse per row; `probs` receives the matching softmax weights.
Eigen::VectorXd row_logsumexp(const Eigen::MatrixXd& scores, bool skip_diag, Eigen::MatrixXd& probs) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index m = scores.cols();
    Eigen::VectorXd lse(n);
    probs.setZero(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < m; ++j) {
            if (skip_diag && i == j) continue;
            mx = std::max(mx, scores(i, j));
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (skip_diag && i == j) continue;
            sum += std::exp(scores(i, j) - mx);
        }
        lse[i] = mx + std::log(sum);
        for (Eigen::Index j = 0; j < m; ++j) {
            if (skip_diag && i == j) continue;
            probs(i, j) = std::exp(scores(i, j) - lse[i]);
        }
    }
    return lse;
}

}  // namespace

std::size_t ClassBlockedBatch::sample_count() const noexcept {
    std::size_t n = 0;
    for (const auto& b : blocks) n += static_cast<std::size_t>(b.rows.rows());
    return n;
}

SimilarityBlocks similarity_blocks(const ClassBlockedBatch& batch) {
    const auto active = active_blocks(batch, true);
    SimilarityBlocks out;
    for (auto k : active) {
        const auto& h = batch.blocks[k].rows;
        out.intra.push_back(h * h.transpose());
        Eigen::Index others = 0;
        for (auto o : active) {
            if (o != k) others += batch.blocks[o].rows.rows();
        }
        Eigen::MatrixXd inter(h.rows(), others);
        Eigen::Index col = 0;
        for (auto o : active) {
            if (o == k) continue;
            const auto& ho = batch.blocks[o].rows;
            inter.middleCols(col, ho.rows()) = h * ho.transpose();
            col += ho.rows();
        }
        out.inter.push_back(std::move(inter));
    }
    return out;
}

BlockLoss loss_pos(const ClassBlockedBatch& batch, bool check_unit_rows) {
    const auto active = active_blocks(batch, check_unit_rows);
    const double classes = static_cast<double>(active.size());
    const double tau = batch.tau;

    BlockLoss out;
    out.grads = zero_grads(batch);
    double total = 0.0;
    Eigen::MatrixXd probs;
    for (auto k : active) {
        const auto& h = batch.blocks[k].rows;
        const double nk = static_cast<double>(h.rows());
        const Eigen::MatrixXd scores = (h * h.transpose()) / tau;
        const Eigen::VectorXd lse = row_logsumexp(scores, true, probs);
        total += (lse.array() - std::log(nk - 1.0)).sum() / nk;
        // ∂/∂H of Σ_i lse_i is (P + Pᵀ) H / τ.
        out.grads[k] = -((probs + probs.transpose()) * h) / (classes * nk * tau);
    }
    out.value = -total / classes;
    return out;
}

BlockLoss loss_neg(const ClassBlockedBatch& batch, bool check_unit_rows) {
    const auto active = active_blocks(batch, check_unit_rows);
    if (active.size() < 2) throw BatchShapeError("negative loss needs at least two classes in the batch");
    const double classes = static_cast<double>(active.size());
    const double tau = batch.tau;

    BlockLoss out;
    out.grads = zero_grads(batch);
    double total = 0.0;
    Eigen::MatrixXd probs;
    for (auto k : active) {
        const auto& h = batch.blocks[k].rows;
        const double nk = static_cast<double>(h.rows());

        Eigen::Index others = 0;
        for (auto o : active) {
            if (o != k) others += batch.blocks[o].rows.rows();
        }
        Eigen::MatrixXd stacked(others, h.cols());
        Eigen::Index r = 0;
        for (auto o : active) {
            if (o == k) continue;
            stacked.middleRows(r, batch.blocks[o].rows.rows()) = batch.blocks[o].rows;
            r += batch.blocks[o].rows.rows();
        }

        const Eigen::MatrixXd scores = (h * stacked.transpose()) / tau;
        const Eigen::VectorXd lse = row_logsumexp(scores, false, probs);
        total += (lse.array() - std::log(static_cast<double>(others))).sum() / nk;

        const double scale = 1.0 / (classes * nk * tau);
        out.grads[k] += scale * (probs * stacked);
        const Eigen::MatrixXd back = scale * (probs.transpose() * h);
        r = 0;
        for (auto o : active) {
            if (o == k) continue;
            const auto rows = batch.blocks[o].rows.rows();
            out.grads[o] += back.middleRows(r, rows);
            r += rows;
        }
    }
    out.value = total / classes;
    return out;
}

CrossEntropy cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
    const Eigen::Index n = logits.rows();
    if (n == 0) throw ContractViolation("cross_entropy needs at least one sample");
    if (static_cast<std::size_t>(n) != labels.size()) throw ContractViolation("cross_entropy: label count mismatch");

    CrossEntropy out;
    out.d_logits.resize(n, logits.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= logits.cols()) {
            throw ContractViolation("cross_entropy: label " + std::to_string(y) + " out of range");
        }
        const double mx = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd shifted = logits.row(i).array() - mx;
        const double lse = std::log(shifted.array().exp().sum());
        total += lse - shifted[y];
        out.d_logits.row(i) = (shifted.array() - lse).exp();
        out.d_logits(i, y) -= 1.0;
    }
    const double inv = 1.0 / static_cast<double>(n);
    out.value = total * inv;
    out.d_logits *= inv;
    return out;
}

std::pair<double, double> blended_objectives(const LossVector& loss, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0,1]", "lambda");
    return {lambda * loss.pos + (1.0 - lambda) * loss.ce, lambda * loss.neg + (1.0 - lambda) * loss.ce};
}

LossVector naive_losses(const ClassBlockedBatch& batch, bool check_unit_rows) {
    const auto active = active_blocks(batch, check_unit_rows);
    const double tau = batch.tau;
    const double classes = static_cast<double>(active.size());

    auto dot = [](const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
        return s;
    };

    LossVector out;
    double pos = 0.0;
    for (auto k : active) {
        const auto& h = batch.blocks[k].rows;
        const auto nk = h.rows();
        double per_class = 0.0;
        for (Eigen::Index i = 0; i < nk; ++i) {
            double inner = 0.0;
            for (Eigen::Index p = 0; p < nk; ++p) {
                if (p == i) continue;
                inner += std::exp(dot(h, i, h, p) / tau);
            }
            per_class += std::log(inner / static_cast<double>(nk - 1));
        }
        pos += per_class / static_cast<double>(nk);
    }
    out.pos = -pos / classes;

    if (active.size() >= 2) {
        double neg = 0.0;
        for (auto k : active) {
            const auto& h = batch.blocks[k].rows;
            const auto nk = h.rows();
            double per_class = 0.0;
            for (Eigen::Index i = 0; i < nk; ++i) {
                double inner = 0.0;
                Eigen::Index count = 0;
                for (auto o : active) {
                    if (o == k) continue;
                    const auto& ho = batch.blocks[o].rows;
                    for (Eigen::Index n = 0; n < ho.rows(); ++n) {
                        inner += std::exp(dot(h, i, ho, n) / tau);
                        ++count;
                    }
                }
                per_class += std::log(inner / static_cast<double>(count));
            }
            neg += per_class / static_cast<double>(nk);
        }
        out.neg = neg / classes;
    } else {
        throw BatchShapeError("negative loss needs at least two classes in the batch");
    }
    return out;
}

}  // namespace paretoscl
