// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "paretoscl/contrastive.hpp"
#include "paretoscl/gradsuite.hpp"
#include "paretoscl/moo.hpp"
#include "paretoscl/paretolab.hpp"
#include "paretoscl/rng.hpp"
#include "paretoscl/sampler.hpp"
#include "paretoscl/split.hpp"
#include "paretoscl/synthetic.hpp"
#include "paretoscl/trainer.hpp"

using namespace paretoscl;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// AC1

Verdict gradient_fidelity() {
    const auto start = Clock::now();
    GradcheckConfig cfg;  // 20 batches × 50 probes, embedding dim 8, tolerance 1e-4
    const auto result = run_gradient_suite(cfg, 0.3, 0.5);
    const double elapsed = seconds_since(start);
    std::ostringstream os;
    bool ok = cfg.batches >= 20 && cfg.probes >= 50 && cfg.embedding_dim == 8;
    for (const auto& l : result.losses) {
        os << l.loss << '=' << fmt("%.2e", l.worst.max_rel_error) << ' ';
        ok = ok && l.worst.max_rel_error < 1e-4 && l.probes >= 50 * cfg.batches;
    }
    os << fmt("over %zu batches; %.1f s (limit 60 s)", cfg.batches, elapsed);
    return {ok && elapsed < 60.0, os.str()};
}

// ---------------------------------------------------------------------------
// AC2

Eigen::RowVectorXd random_unit(std::mt19937_64& gen, Eigen::Index d) {
    std::normal_distribution<double> n;
    Eigen::RowVectorXd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v[j] = n(gen);
    return v / v.norm();
}

double dot_rows(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

// Reference losses written as explicit loops over anchors, partners and classes.
std::pair<double, double> reference_losses(const ClassBlockedBatch& b) {
    const double tau = b.tau;
    const auto classes = b.blocks.size();
    double pos = 0.0;
    double neg = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
        const auto& rows = b.blocks[k].rows;
        const auto nk = rows.rows();
        double pk = 0.0;
        double qk = 0.0;
        for (Eigen::Index i = 0; i < nk; ++i) {
            double same = 0.0;
            for (Eigen::Index p = 0; p < nk; ++p) {
                if (p != i) same += std::exp(dot_rows(rows.row(i), rows.row(p)) / tau);
            }
            pk += std::log(same / static_cast<double>(nk - 1));
            double other = 0.0;
            Eigen::Index count = 0;
            for (std::size_t o = 0; o < classes; ++o) {
                if (o == k) continue;
                for (Eigen::Index n = 0; n < b.blocks[o].rows.rows(); ++n, ++count) {
                    other += std::exp(dot_rows(rows.row(i), b.blocks[o].rows.row(n)) / tau);
                }
            }
            qk += std::log(other / static_cast<double>(count));
        }
        pos += pk / static_cast<double>(nk);
        neg += qk / static_cast<double>(nk);
    }
    return {-pos / static_cast<double>(classes), neg / static_cast<double>(classes)};
}

ClassBlockedBatch fixture(const std::vector<std::vector<std::vector<double>>>& classes, double tau) {
    ClassBlockedBatch b;
    b.tau = tau;
    std::size_t id = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        ClassBlock block;
        block.label = static_cast<int>(k);
        block.rows.resize(static_cast<Eigen::Index>(classes[k].size()), 2);
        for (std::size_t i = 0; i < classes[k].size(); ++i) {
            block.rows(static_cast<Eigen::Index>(i), 0) = classes[k][i][0];
            block.rows(static_cast<Eigen::Index>(i), 1) = classes[k][i][1];
            block.ids.push_back(id++);
        }
        b.blocks.push_back(std::move(block));
    }
    return b;
}

Verdict oracle_equivalence() {
    const auto start = Clock::now();
    std::mt19937_64 gen(20240601);
    std::uniform_int_distribution<int> classes(2, 4), rows(2, 6), dim(2, 16);
    std::uniform_real_distribution<double> tau(0.1, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        ClassBlockedBatch b;
        b.tau = tau(gen);
        const int c = classes(gen);
        const Eigen::Index d = dim(gen);
        std::size_t id = 0;
        for (int k = 0; k < c; ++k) {
            ClassBlock block;
            block.label = k;
            const int n = rows(gen);
            block.rows.resize(n, d);
            for (int i = 0; i < n; ++i) {
                block.rows.row(i) = random_unit(gen, d);
                block.ids.push_back(id++);
            }
            b.blocks.push_back(std::move(block));
        }
        const auto [pos, neg] = reference_losses(b);
        worst = std::max({worst, std::abs(loss_pos(b).value - pos), std::abs(loss_neg(b).value - neg)});
    }
    const auto same = fixture({{{1, 0}, {1, 0}}, {{1, 0}, {1, 0}}}, 0.5);
    const auto opposite = fixture({{{1, 0}, {1, 0}}, {{-1, 0}, {-1, 0}}}, 0.5);
    const double f1 = std::abs(loss_pos(same).value + 2.0);
    const double f2 = std::abs(loss_neg(same).value - 2.0);
    const double f3 = std::abs(loss_neg(opposite).value + 2.0);
    const double elapsed = seconds_since(start);
    const bool ok = worst <= 1e-10 && f1 <= 1e-12 && f2 <= 1e-12 && f3 <= 1e-12 && elapsed < 10.0;
    return {ok, fmt("1000 batches max |diff| %.2e (tol 1e-10); fixtures off by %.1e/%.1e/%.1e (tol 1e-12); %.2f s",
                    worst, f1, f2, f3, elapsed)};
}

// ---------------------------------------------------------------------------
// AC3, AC4

const std::vector<PreferenceVector>& rays() {
    static const std::vector<PreferenceVector> r{{0.1, 0.9}, {0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}, {0.9, 0.1}};
    return r;
}

constexpr std::size_t kInits = 10;

std::vector<double> toy_init(std::uint64_t i) { return random_init(20, 2.0, mix_seed(0x746f79, i)); }

Verdict epo_exactness(const ToyProblem& problem, const std::vector<ObjectivePoint>& front) {
    const auto start = Clock::now();
    ToyRunSettings s;
    s.steps = 5000;
    s.step_size = 0.05;
    s.record_steps = false;
    bool ok = true;
    std::ostringstream os;
    for (const auto& r : rays()) {
        std::size_t good = 0;
        double worst_gap = 0.0;
        for (std::size_t i = 0; i < kInits; ++i) {
            const auto tr = run_toy(problem, ToySolver::epo, r, toy_init(i), s);
            worst_gap = std::max(worst_gap, tr.final_ray_gap);
            if (tr.final_ray_gap < 1e-2 && front_dominance_check(tr.final_point, front, 1e-3)) ++good;
        }
        ok = ok && good >= 9;
        os << fmt("r1=%.2f %zu/10 (max gap %.1e) ", r[0], good, worst_gap);
    }
    const double elapsed = seconds_since(start);
    os << fmt("; %.2f s (limit 120 s)", elapsed);
    return {ok && elapsed < 120.0, os.str()};
}

Verdict ls_limitation(const ToyProblem& problem, const std::vector<ObjectivePoint>& front) {
    const auto start = Clock::now();
    ToyRunSettings s;
    s.steps = 5000;
    s.step_size = 0.05;
    s.record_steps = false;
    bool all_front = true;
    double max_median = 0.0;
    std::ostringstream os;
    for (const auto& r : rays()) {
        std::vector<double> gaps;
        std::size_t on_front = 0;
        for (std::size_t i = 0; i < kInits; ++i) {
            const auto tr = run_toy(problem, ToySolver::ls, r, toy_init(i), s);
            gaps.push_back(tr.final_ray_gap);
            if (front_dominance_check(tr.final_point, front, 1e-3)) ++on_front;
        }
        all_front = all_front && on_front == kInits;
        std::sort(gaps.begin(), gaps.end());
        const double median = 0.5 * (gaps[kInits / 2 - 1] + gaps[kInits / 2]);
        max_median = std::max(max_median, median);
        os << fmt("r1=%.2f front %zu/10 median gap %.3f ", r[0], on_front, median);
    }
    const double elapsed = seconds_since(start);
    os << fmt("; %.2f s (limit 120 s)", elapsed);
    return {all_front && max_median > 0.1 && elapsed < 120.0, os.str()};
}

// ---------------------------------------------------------------------------
// AC5

Verdict non_uniformity_properties() {
    const auto start = Clock::now();
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> r1(0.01, 0.99), loss(1e-3, 10.0);
    std::size_t zero_failures = 0, positive_failures = 0, scale_failures = 0;
    double worst_scale = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const auto r = PreferenceVector::from_first(r1(gen));
        const double l1 = loss(gen);
        // Even trials sit on the ray r₁ℓ₁ = r₂ℓ₂; odd trials are generic.
        const double l2 = t % 2 == 0 ? r[0] * l1 / r[1] : loss(gen);
        const ObjectivePoint l{l1, l2};
        const double mu = non_uniformity(l, r).mu;
        const bool on_ray = std::abs(r[0] * l1 - r[1] * l2) <= 1e-12 * std::max(r[0] * l1, r[1] * l2);
        if (on_ray && mu > 1e-12) ++zero_failures;
        if (!on_ray && !(mu > 0.0)) ++positive_failures;
        for (double c : {1e-3, 1.0, 1e3}) {
            const double diff = std::abs(non_uniformity({c * l1, c * l2}, r).mu - mu);
            worst_scale = std::max(worst_scale, diff);
            if (diff > 1e-12) ++scale_failures;
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok = zero_failures == 0 && positive_failures == 0 && scale_failures == 0 && elapsed < 5.0;
    return {ok, fmt("10^4 samples: on-ray μ>1e-12 %zu, off-ray μ=0 %zu, scale |Δμ| max %.1e (tol 1e-12); %.2f s",
                    zero_failures, positive_failures, worst_scale, elapsed)};
}

// ---------------------------------------------------------------------------
// AC6

Verdict min_norm_properties() {
    const auto start = Clock::now();
    std::mt19937_64 gen(6);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> mix(-1.0, 1.0);
    std::size_t interior = 0;
    double worst_identity = 0.0;
    double worst_norm = -1e300;
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> g1(100), g2(100);
        for (auto& x : g1) x = n(gen);
        // Correlated pairs keep a good share of interior solutions.
        const double a = mix(gen);
        for (std::size_t i = 0; i < 100; ++i) g2[i] = a * g1[i] + (1.0 - std::abs(a)) * n(gen);
        const auto w = min_norm_weights(g1, g2);
        std::vector<double> d(100);
        for (std::size_t i = 0; i < 100; ++i) d[i] = w.beta[0] * g1[i] + w.beta[1] * g2[i];
        const double dd = dot(d, d);
        worst_norm = std::max(worst_norm, std::sqrt(dd) - std::min(std::sqrt(dot(g1, g1)), std::sqrt(dot(g2, g2))));
        if (w.beta[0] > 0.0 && w.beta[0] < 1.0) {
            ++interior;
            worst_identity = std::max({worst_identity, std::abs(dot(g1, d) - dd), std::abs(dot(g2, d) - dd)});
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok = worst_identity <= 1e-9 && worst_norm <= 1e-9 && interior > 0 && elapsed < 5.0;
    return {ok, fmt("10^4 pairs (%zu interior): max |g·d−‖d‖²| %.1e, max ‖d‖−min‖g‖ %.1e (tol 1e-9); %.2f s",
                    interior, worst_identity, worst_norm, elapsed)};
}

// ---------------------------------------------------------------------------
// AC7

Dataset cyclic_dataset(std::size_t n, std::size_t classes) {
    Dataset d;
    for (std::size_t k = 0; k < classes; ++k) d.labels.push_back("c" + std::to_string(k));
    for (std::size_t i = 0; i < n; ++i) d.rows.push_back({"x", std::nullopt, static_cast<int>(i % classes)});
    return d;
}

std::string protocol_properties() {
    std::size_t failures = 0;
    for (std::size_t classes : {2u, 3u, 5u}) {
        const auto train = cyclic_dataset(40 * classes, classes);
        const auto dev = cyclic_dataset(300, classes);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const std::size_t n = 2 * classes + seed % 20;
            const auto split = make_fewshot_split(train, dev, n, seed);
            if (!(split == make_fewshot_split(train, dev, n, seed))) ++failures;
            std::vector<std::size_t> counts(classes, 0);
            for (auto id : split.train) ++counts[static_cast<std::size_t>(train.rows[id].label)];
            const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
            if (*lo < 2 || *hi - *lo > 1 || split.train.size() != n) ++failures;

            const auto by_class = train.ids_by_class(split.train);
            const std::size_t total = std::max<std::size_t>(16, 2 * classes);
            const auto batch = sample_class_batch(by_class, total, seed);
            if (batch.total() != total || batch.per_class.size() != classes) ++failures;
            for (const auto& c : batch.per_class) {
                if (c.size() < 2) ++failures;
            }
            if (classes == 2 && (batch.per_class[0].size() != 8 || batch.per_class[1].size() != 8)) ++failures;
            if (batch.per_class != sample_class_batch(by_class, total, seed).per_class) ++failures;
        }
    }
    return failures == 0 ? "" : std::to_string(failures) + " protocol property failures";
}

// Nearest-centroid accuracy of the hashed features; the task is built to make this near-perfect.
double centroid_accuracy(const PreparedData& data, const FewShotSplit& split) {
    std::map<int, std::map<std::uint32_t, double>> centroids;
    for (auto id : split.train) {
        const auto& f = data.train_features[id];
        auto& c = centroids[data.train.rows[id].label];
        for (std::size_t j = 0; j < f.indices.size(); ++j) c[f.indices[j]] += f.weights[j];
    }
    std::size_t correct = 0;
    for (auto id : split.test) {
        const auto& f = data.dev_features[id];
        int best = -1;
        double best_score = -1e300;
        for (const auto& [label, c] : centroids) {
            double norm = 0.0, score = 0.0;
            for (const auto& [j, v] : c) norm += v * v;
            for (std::size_t j = 0; j < f.indices.size(); ++j) {
                if (auto it = c.find(f.indices[j]); it != c.end()) score += it->second * f.weights[j];
            }
            score /= std::sqrt(norm);
            if (score > best_score) {
                best_score = score;
                best = label;
            }
        }
        if (best == data.dev.rows[id].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(split.test.size());
}

Verdict protocol_fidelity() {
    const auto start = Clock::now();
    const auto property_error = protocol_properties();

    auto task = make_two_cluster_task({}, 0);
    RunConfig base;
    base.fewshot_n = 20;
    base.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    base.workers = 0;
    const auto data = prepare_data(std::move(task.train), std::move(task.dev), base.vectorizer);
    const auto first_split = make_split(base, data, 0);

    std::map<std::string, RunReport> reports;
    for (auto mode : {TrainMode::ce, TrainMode::ce_ls, TrainMode::ce_epo}) {
        RunConfig c = base;
        c.mode = mode;
        reports[to_string(mode)] = run_experiment(c, data, RunOptions{false, {}});
    }
    const double elapsed = seconds_since(start);

    std::vector<std::pair<double, std::string>> order;
    for (const auto& [mode, r] : reports) order.emplace_back(r.mean, mode);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::ostringstream os;
    for (const auto& [mode, r] : reports) {
        os << fmt("%s %.4f±%.4f (%zu/10) ", mode.c_str(), r.mean, r.std, r.completed);
    }
    os << "ordering:";
    for (const auto& [m, name] : order) os << ' ' << name;
    os << fmt("; test size %zu, centroid oracle %.3f", first_split.test.size(), centroid_accuracy(data, first_split));
    os << fmt("; %.1f s (limit 300 s)", elapsed);
    if (!property_error.empty()) os << "; " << property_error;

    const auto& epo = reports["ce_epo"];
    const auto& ls = reports["ce_ls"];
    const bool ok = property_error.empty() && first_split.test.size() == 200 && epo.completed == 10 &&
                    ls.completed == 10 && epo.mean >= 0.90 && ls.mean >= 0.90 && reports["ce"].completed == 10 &&
                    elapsed < 300.0;
    return {ok, os.str()};
}

// ---------------------------------------------------------------------------
// AC8

Verdict mode_collapse() {
    const auto start = Clock::now();
    auto task = make_two_cluster_task({}, 1);
    RunConfig ce;
    ce.mode = TrainMode::ce;
    ce.epochs = 50;  // 20 rows, batch 16 → 2 steps per epoch
    ce.eval_interval = 10;
    RunConfig ls = ce;
    ls.mode = TrainMode::ce_ls;
    ls.lambda = 0.0;
    const auto data = prepare_data(std::move(task.train), std::move(task.dev), ce.vectorizer);

    std::vector<StepRecord> trace_ce, trace_ls;
    ParamVector best_ce, best_ls;
    auto keep = [](ParamVector& slot) {
        return [&slot](const SeedResult&, const Encoder&, const ParamVector& p) {
            slot = p;
            return std::string{};
        };
    };
    const auto a = run_seed(ce, data, 7, &trace_ce, keep(best_ce));
    const auto b = run_seed(ls, data, 7, &trace_ls, keep(best_ls));

    bool same = a.ok && b.ok && trace_ce.size() == 100 && trace_ls.size() == 100;
    for (std::size_t i = 0; same && i < trace_ce.size(); ++i) {
        const auto& x = trace_ce[i].loss;
        const auto& y = trace_ls[i].loss;
        same = x.pos == y.pos && x.neg == y.neg && x.ce == y.ce &&
               trace_ce[i].validation_accuracy == trace_ls[i].validation_accuracy;
    }
    same = same && best_ce.values == best_ls.values && a.best_step == b.best_step &&
           a.test_accuracy == b.test_accuracy;

    // Raw update loop: parameters after every one of 100 steps.
    const Encoder encoder(encoder_shape(ce, data.train.num_classes()));
    auto pa = encoder.init(3);
    auto pb = pa;
    auto sa = OptimizerState::for_params(pa, ce.optimizer);
    auto sb = sa;
    const auto split = make_split(ce, data, 3);
    const auto groups = data.train.ids_by_class(split.train);
    std::size_t first_mismatch = 0;
    for (long step = 0; step < 100; ++step) {
        const auto batch = sample_class_batch(groups, ce.batch_size, mix_seed(11, static_cast<std::uint64_t>(step)));
        const auto dropout = mix_seed(12, static_cast<std::uint64_t>(step));
        train_step(encoder, pa, sa, batch, data.train_features, ce, dropout, step + 1);
        train_step(encoder, pb, sb, batch, data.train_features, ls, dropout, step + 1);
        if (first_mismatch == 0 && pa.values != pb.values) first_mismatch = static_cast<std::size_t>(step + 1);
    }
    same = same && first_mismatch == 0;
    const double elapsed = seconds_since(start);
    return {same, fmt("100-step runs: traces, checkpoints and test accuracy %s; raw update loop %s; %.1f s",
                      (a.ok && b.ok && best_ce.values == best_ls.values) ? "identical" : "differ",
                      first_mismatch == 0 ? "identical" : ("diverges at step " + std::to_string(first_mismatch)).c_str(),
                      elapsed)};
}

}  // namespace

int main() {
    const ToyProblem problem(20);
    const auto front = front_samples(problem);
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AC1 gradient fidelity", gradient_fidelity},
        {"AC2 oracle equivalence", oracle_equivalence},
        {"AC3 EPO exactness", [&] { return epo_exactness(problem, front); }},
        {"AC4 LS limitation", [&] { return ls_limitation(problem, front); }},
        {"AC5 non-uniformity properties", non_uniformity_properties},
        {"AC6 min-norm properties", min_norm_properties},
        {"AC7 protocol fidelity", protocol_fidelity},
        {"AC8 mode-collapse identity", mode_collapse},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
        if (!v.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
