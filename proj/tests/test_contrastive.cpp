#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "paretoscl/contrastive.hpp"
#include "paretoscl/errors.hpp"
#include "test_support.hpp"

using namespace paretoscl;
using testing::batch_of;
using testing::random_batch;

namespace {

// ℓ_pos written directly against per-class similarity matrices.
double pos_from_similarities(const std::vector<Eigen::MatrixXd>& intra, double tau) {
    double total = 0.0;
    for (const auto& m : intra) {
        const auto n = m.rows();
        double cls = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (Eigen::Index p = 0; p < n; ++p) {
                if (p != i) s += std::exp(m(i, p) / tau);
            }
            cls += std::log(s / static_cast<double>(n - 1));
        }
        total += cls / static_cast<double>(n);
    }
    return -total / static_cast<double>(intra.size());
}

double neg_from_similarities(const std::vector<Eigen::MatrixXd>& inter, double tau) {
    double total = 0.0;
    for (const auto& m : inter) {
        double cls = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < m.cols(); ++j) s += std::exp(m(i, j) / tau);
            cls += std::log(s / static_cast<double>(m.cols()));
        }
        total += cls / static_cast<double>(m.rows());
    }
    return total / static_cast<double>(inter.size());
}

double ce_naive(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        double z = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) z += std::exp(logits(s, c));
        total += -std::log(std::exp(logits(s, labels[static_cast<std::size_t>(s)])) / z);
    }
    return total / static_cast<double>(logits.rows());
}

}  // namespace

TEST_CASE("hand fixtures") {
    const auto same = batch_of({{{1, 0}, {1, 0}}, {{1, 0}, {1, 0}}}, 0.5);
    CHECK(loss_pos(same).value == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(loss_neg(same).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(naive_losses(same).pos + 2.0) < 1e-12);
    CHECK(std::abs(naive_losses(same).neg - 2.0) < 1e-12);

    const auto opposite = batch_of({{{1, 0}, {1, 0}}, {{-1, 0}, {-1, 0}}}, 0.5);
    CHECK(std::abs(loss_neg(opposite).value + 2.0) < 1e-12);
    CHECK(std::abs(naive_losses(opposite).neg + 2.0) < 1e-12);

    const double h = std::sqrt(3.0) / 2.0;
    const auto mixed = batch_of({{{1, 0}, {0.5, h}}, {{-1, 0}, {-1, 0}}}, 0.5);
    CHECK(std::abs(loss_pos(mixed).value + 1.5) < 1e-12);

    const auto ortho = batch_of({{{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}}, 0.5);
    CHECK(std::abs(loss_pos(ortho).value) < 1e-15);
    const auto ortho_inter = batch_of({{{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}}, 0.5);
    CHECK(std::abs(loss_neg(ortho_inter).value) < 1e-15);
}

TEST_CASE("similarity blocks") {
    const auto same = batch_of({{{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}}, 1.0);
    const auto s = similarity_blocks(same);
    CHECK(s.intra[0] == Eigen::MatrixXd::Ones(2, 2));
    CHECK(s.inter[0] == Eigen::MatrixXd::Zero(2, 2));

    std::mt19937_64 gen(9);
    const auto b = random_batch(gen, 3, 2, 5, 7, 0.3);
    const auto sb = similarity_blocks(b);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& hk = b.blocks[k].rows;
        Eigen::Index others = 0;
        for (std::size_t o = 0; o < 3; ++o) {
            if (o != k) others += b.blocks[o].rows.rows();
        }
        CHECK(sb.inter[k].cols() == others);
        for (Eigen::Index i = 0; i < hk.rows(); ++i) {
            CHECK(std::abs(sb.intra[k](i, i) - 1.0) < 1e-9);
            for (Eigen::Index p = 0; p < hk.rows(); ++p) {
                double dot = 0.0;
                for (Eigen::Index j = 0; j < hk.cols(); ++j) dot += hk(i, j) * hk(p, j);
                CHECK(std::abs(sb.intra[k](i, p) - dot) < 1e-12);
                CHECK(sb.intra[k](i, p) == sb.intra[k](p, i));
            }
            Eigen::Index col = 0;
            for (std::size_t o = 0; o < 3; ++o) {
                if (o == k) continue;
                for (Eigen::Index n = 0; n < b.blocks[o].rows.rows(); ++n, ++col) {
                    double dot = 0.0;
                    for (Eigen::Index j = 0; j < hk.cols(); ++j) dot += hk(i, j) * b.blocks[o].rows(n, j);
                    CHECK(std::abs(sb.inter[k](i, col) - dot) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("vectorized losses agree with the naive loops and stay in bounds") {
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<int> classes(2, 4);
    std::uniform_real_distribution<double> tau(0.05, 2.0);
    const Eigen::Index dims[] = {2, 8, 64};
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const double tt = tau(gen);
        const auto b = random_batch(gen, classes(gen), 2, 6, dims[t % 3], tt);
        const auto naive = naive_losses(b);
        const double pos = loss_pos(b).value;
        const double neg = loss_neg(b).value;
        worst = std::max({worst, std::abs(pos - naive.pos), std::abs(neg - naive.neg)});
        CHECK(pos >= -1.0 / tt - 1e-12);
        CHECK(pos <= 1.0 / tt + 1e-12);
        CHECK(neg >= -1.0 / tt - 1e-12);
        CHECK(neg <= 1.0 / tt + 1e-12);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("losses are invariant to sample and class permutations") {
    std::mt19937_64 gen(31);
    for (int t = 0; t < 50; ++t) {
        auto b = random_batch(gen, 3, 2, 5, 8, 0.4);
        const double pos = loss_pos(b).value;
        const double neg = loss_neg(b).value;
        auto shuffled = b;
        for (auto& block : shuffled.blocks) {
            std::vector<Eigen::Index> order(static_cast<std::size_t>(block.rows.rows()));
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
            std::shuffle(order.begin(), order.end(), gen);
            Eigen::MatrixXd rows = block.rows;
            for (std::size_t i = 0; i < order.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = block.rows.row(order[i]);
            block.rows = rows;
        }
        std::shuffle(shuffled.blocks.begin(), shuffled.blocks.end(), gen);
        CHECK(std::abs(loss_pos(shuffled).value - pos) < 1e-12);
        CHECK(std::abs(loss_neg(shuffled).value - neg) < 1e-12);
    }
}

TEST_CASE("monotone response to a single similarity") {
    std::mt19937_64 gen(8);
    for (int t = 0; t < 100; ++t) {
        const auto b = random_batch(gen, 3, 2, 5, 4, 0.3);
        const auto s = similarity_blocks(b);
        auto intra = s.intra;
        const double base_pos = pos_from_similarities(intra, 0.3);
        CHECK(std::abs(base_pos - loss_pos(b).value) < 1e-10);
        intra[1](0, 1) += 0.1;
        intra[1](1, 0) += 0.1;
        CHECK(pos_from_similarities(intra, 0.3) < base_pos);

        auto inter = s.inter;
        const double base_neg = neg_from_similarities(inter, 0.3);
        CHECK(std::abs(base_neg - loss_neg(b).value) < 1e-10);
        inter[2](0, 0) += 0.1;
        CHECK(neg_from_similarities(inter, 0.3) > base_neg);
    }
    // Embedding-level version: pulling the two rows of a class together lowers ℓ_pos.
    auto near = batch_of({{{1, 0}, {std::cos(0.5), std::sin(0.5)}}, {{0, 1}, {0, -1}}}, 0.5);
    auto nearer = batch_of({{{1, 0}, {std::cos(0.3), std::sin(0.3)}}, {{0, 1}, {0, -1}}}, 0.5);
    CHECK(loss_pos(nearer).value < loss_pos(near).value);
}

TEST_CASE("embedding gradients match central differences") {
    std::mt19937_64 gen(77);
    double worst = 0.0;
    for (int t = 0; t < 40; ++t) {
        const auto b = random_batch(gen, 2 + t % 3, 2, 5, 1 + t % 8, 0.2 + 0.1 * (t % 5));
        const auto gp = loss_pos(b).grads;
        const auto gn = loss_neg(b).grads;
        const double h = 1e-6;
        for (std::size_t k = 0; k < b.blocks.size(); ++k) {
            for (Eigen::Index i = 0; i < b.blocks[k].rows.rows(); ++i) {
                for (Eigen::Index j = 0; j < b.blocks[k].rows.cols(); ++j) {
                    auto plus = b, minus = b;
                    plus.blocks[k].rows(i, j) += h;
                    minus.blocks[k].rows(i, j) -= h;
                    const double fp = (loss_pos(plus, false).value - loss_pos(minus, false).value) / (2 * h);
                    const double fn = (loss_neg(plus, false).value - loss_neg(minus, false).value) / (2 * h);
                    const double ep = std::abs(fp - gp[k](i, j)) / std::max(1e-8, std::abs(fp) + std::abs(gp[k](i, j)));
                    const double en = std::abs(fn - gn[k](i, j)) / std::max(1e-8, std::abs(fn) + std::abs(gn[k](i, j)));
                    worst = std::max({worst, ep, en});
                }
            }
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("cross-entropy") {
    Eigen::MatrixXd z(1, 2);
    z << 0, 0;
    CHECK(cross_entropy(z, {0}).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    z << 1000, 0;
    const auto big = cross_entropy(z, {0});
    CHECK(std::isfinite(big.value));
    CHECK(big.value == doctest::Approx(0.0));
    CHECK(std::isfinite(big.d_logits(0, 0)));

    std::mt19937_64 gen(5);
    std::normal_distribution<double> n;
    for (int t = 0; t < 200; ++t) {
        Eigen::MatrixXd l(5, 3);
        std::vector<int> y;
        for (int s = 0; s < 5; ++s) {
            for (int c = 0; c < 3; ++c) l(s, c) = n(gen);
            y.push_back(static_cast<int>(gen() % 3));
        }
        const auto ce = cross_entropy(l, y);
        CHECK(std::abs(ce.value - ce_naive(l, y)) < 1e-12);
        CHECK(ce.value >= 0.0);
        for (int s = 0; s < 5; ++s) {
            for (int c = 0; c < 3; ++c) {
                auto lp = l, lm = l;
                lp(s, c) += 1e-6;
                lm(s, c) -= 1e-6;
                const double fd = (ce_naive(lp, y) - ce_naive(lm, y)) / 2e-6;
                CHECK(std::abs(fd - ce.d_logits(s, c)) < 1e-8);
            }
        }
    }
    CHECK_THROWS_AS(cross_entropy(z, {2}), ContractViolation);
    CHECK_THROWS_AS(cross_entropy(z, {-1}), ContractViolation);
}

TEST_CASE("blended objectives") {
    const LossVector l{-1.0, 0.5, 0.7};
    const auto [a, b] = blended_objectives(l, 0.3);
    CHECK(a == doctest::Approx(0.19).epsilon(1e-14));
    CHECK(b == doctest::Approx(0.64).epsilon(1e-14));
    CHECK(blended_objectives(l, 0.0) == std::pair<double, double>{0.7, 0.7});
    CHECK(blended_objectives(l, 1.0) == std::pair<double, double>{-1.0, 0.5});
    CHECK_THROWS_AS(blended_objectives(l, 1.5), ConfigError);
    CHECK_THROWS_AS(blended_objectives(l, -0.1), ConfigError);
}

TEST_CASE("batch contract violations") {
    const auto single_row = batch_of({{{1, 0}}, {{0, 1}, {0, 1}}}, 0.5);
    CHECK_THROWS_AS(loss_pos(single_row), BatchShapeError);
    const auto one_class = batch_of({{{1, 0}, {0, 1}}}, 0.5);
    CHECK_NOTHROW(loss_pos(one_class));
    CHECK_THROWS_AS(loss_neg(one_class), BatchShapeError);
    const auto not_unit = batch_of({{{2, 0}, {1, 0}}, {{0, 1}, {0, 1}}}, 0.5);
    CHECK_THROWS_AS(loss_pos(not_unit), ContractViolation);
    auto bad_tau = batch_of({{{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}}, 0.0);
    CHECK_THROWS_AS(loss_pos(bad_tau), ConfigError);
}

TEST_CASE("absent classes do not count towards C") {
    auto b = batch_of({{{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}}, 0.5);
    const double with_two = loss_pos(b).value;
    ClassBlock empty;
    empty.label = 2;
    empty.rows.resize(0, 2);
    b.blocks.push_back(empty);
    CHECK(loss_pos(b).value == doctest::Approx(with_two));
    CHECK(loss_neg(b).value == doctest::Approx(0.0));
}
