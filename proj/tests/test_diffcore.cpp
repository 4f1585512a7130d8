#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <cstring>
#include <iterator>

#include "paretoscl/adamw.hpp"
#include "paretoscl/errors.hpp"
#include "paretoscl/gradcheck.hpp"
#include "paretoscl/params.hpp"
#include "paretoscl/rng.hpp"
#include "test_support.hpp"

using namespace paretoscl;

namespace {

ParamLayout small_layout() {
    ParamLayout l;
    l.add("w", {4, 3}).add("b", {3}).add("v", {3, 2});
    return l;
}

// Straight transcription of decoupled-decay Adam for one scalar stream.
struct ScalarAdam {
    double theta, m = 0.0, v = 0.0;
    int t = 0;
    void step(double g, const AdamWSettings& s) {
        ++t;
        m = s.beta1 * m + (1 - s.beta1) * g;
        v = s.beta2 * v + (1 - s.beta2) * g * g;
        const double mh = m / (1 - std::pow(s.beta1, t));
        const double vh = v / (1 - std::pow(s.beta2, t));
        theta = theta - s.lr * s.weight_decay * theta;
        theta = theta - s.lr * mh / (std::sqrt(vh) + s.eps);
    }
};

}  // namespace

TEST_CASE("fnv1a64 matches published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("rng streams are deterministic and bounded") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        CHECK(r.uniform_index(13) < 13);
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}

TEST_CASE("layout offsets are contiguous and validated") {
    const auto l = small_layout();
    std::size_t expect = 0;
    for (const auto& s : l.segments()) {
        CHECK(s.offset == expect);
        expect += s.size();
    }
    CHECK(l.total_size() == expect);
    CHECK(l.segment_of(12) == "b");
    ParamLayout dup;
    dup.add("x", {2});
    CHECK_THROWS_AS(dup.add("x", {3}), ConfigError);
    CHECK_THROWS_AS(dup.add("z", {0, 2}), ConfigError);
    CHECK_THROWS_AS(dup.add("r3", {1, 1, 1}), ConfigError);
}

TEST_CASE("init_params: zero biases, deterministic, within the fan bound") {
    ParamLayout l;
    l.add("w", {100, 50}).add("b", {3});
    const auto p = init_params(l, 9);
    const auto q = init_params(l, 9);
    CHECK(p.values == q.values);
    for (double b : p.view("b")) CHECK(b == 0.0);
    const double bound = std::sqrt(6.0 / 150.0);
    double max_abs = 0.0;
    for (double w : p.view("w")) max_abs = std::max(max_abs, std::abs(w));
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.9 * bound);
    CHECK(init_params(l, 10).values != p.values);
    CHECK_THROWS_AS(init_params(ParamLayout{}, 0), ConfigError);
}

TEST_CASE("adamw documented single-step examples") {
    ParamLayout l;
    l.add("theta", {1});
    ParamVector p{l, {1.0}};
    AdamWSettings s{0.1, 0.9, 0.999, 1e-8, 0.0};
    auto st = OptimizerState::for_params(p, s);
    const std::vector<double> g{1.0};
    adamw_step(p, g, st);
    CHECK(p.values[0] == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    CHECK(st.step_count == 1);

    ParamVector q{l, {1.0}};
    s.weight_decay = 0.01;
    auto st2 = OptimizerState::for_params(q, s);
    const std::vector<double> zero{0.0};
    adamw_step(q, zero, st2);
    CHECK(q.values[0] == doctest::Approx(0.999).epsilon(1e-15));
}

TEST_CASE("adamw with zero gradient and zero decay is the identity for any state") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n;
    const auto l = small_layout();
    auto p = init_params(l, 1);
    AdamWSettings s;
    s.weight_decay = 0.0;
    auto st = OptimizerState::for_params(p, s);
    // Drive the state away from zero first.
    for (int k = 0; k < 3; ++k) {
        std::vector<double> g(p.size());
        for (auto& x : g) x = n(gen);
        adamw_step(p, g, st);
    }
    const auto before = p.values;
    st.first_moment.assign(p.size(), 0.0);
    const std::vector<double> zero(p.size(), 0.0);
    adamw_step(p, zero, st);
    CHECK(p.values == before);
    for (double v : st.second_moment) CHECK(v >= 0.0);
}

TEST_CASE("adamw matches the scalar oracle over many steps") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> n;
    const auto l = small_layout();
    auto p = init_params(l, 5);
    AdamWSettings s{3e-3, 0.8, 0.99, 1e-7, 0.05};
    auto st = OptimizerState::for_params(p, s);
    std::vector<ScalarAdam> oracle;
    for (double v : p.values) oracle.push_back({v});
    for (int step = 0; step < 25; ++step) {
        std::vector<double> g(p.size());
        for (auto& x : g) x = n(gen);
        adamw_step(p, g, st);
        for (std::size_t i = 0; i < g.size(); ++i) oracle[i].step(g[i], s);
    }
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.values[i] == doctest::Approx(oracle[i].theta).epsilon(1e-13));
}

TEST_CASE("sparse adamw is bitwise identical to the dense update") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n;
    const auto l = small_layout();
    auto dense = init_params(l, 2);
    auto sparse = dense;
    AdamWSettings s;
    auto sd = OptimizerState::for_params(dense, s);
    auto ss = OptimizerState::for_params(sparse, s);
    for (int step = 0; step < 10; ++step) {
        std::vector<std::size_t> support;
        std::vector<double> values;
        std::vector<double> full(dense.size(), 0.0);
        for (std::size_t i = 0; i < dense.size(); ++i) {
            if (gen() % 3 == 0) {
                support.push_back(i);
                values.push_back(n(gen));
                full[i] = values.back();
            }
        }
        adamw_step(dense, full, sd);
        adamw_step_sparse(sparse, support, values, ss);
    }
    CHECK(dense.values == sparse.values);
    CHECK(sd.first_moment == ss.first_moment);
    CHECK(sd.second_moment == ss.second_moment);
    const std::vector<std::size_t> unsorted{3, 1};
    const std::vector<double> two{1.0, 1.0};
    CHECK_THROWS_AS(adamw_step_sparse(sparse, unsorted, two, ss), ContractViolation);
}

TEST_CASE("adamw errors") {
    const auto l = small_layout();
    auto p = init_params(l, 1);
    auto st = OptimizerState::for_params(p, {});
    CHECK_THROWS_AS(adamw_step(p, std::vector<double>(p.size() - 1, 0.0), st), ContractViolation);
    std::vector<double> g(p.size(), 0.0);
    g[16] = std::nan("");
    try {
        adamw_step(p, g, st);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("'v'") != std::string::npos);
    }
    AdamWSettings bad;
    bad.lr = 0.0;
    CHECK_THROWS_AS(OptimizerState::for_params(p, bad), ConfigError);
    bad = {};
    bad.beta2 = 1.0;
    CHECK_THROWS_AS(OptimizerState::for_params(p, bad), ConfigError);
}

TEST_CASE("finite_diff_check on closed-form objectives") {
    ParamLayout l;
    l.add("theta", {1});
    ParamVector p{l, {3.0}};
    const std::vector<double> six{6.0};
    const auto sq = finite_diff_check([](const ParamVector& q) { return q.values[0] * q.values[0]; }, p, six, 1,
                                      1e-5);
    CHECK(sq.max_rel_error < 1e-6);
    const std::vector<double> zero{0.0};
    const auto c = finite_diff_check([](const ParamVector&) { return 2.5; }, p, zero, 1, 1e-5);
    CHECK(c.max_rel_error == doctest::Approx(0.0));
    CHECK_THROWS_AS(finite_diff_check([](const ParamVector&) { return std::nan(""); }, p, zero, 1, 1e-5),
                    NumericError);
    CHECK_THROWS_AS(finite_diff_check([](const ParamVector&) { return 0.0; }, p, zero, 0, 1e-5), ConfigError);
    CHECK_THROWS_AS(finite_diff_check([](const ParamVector&) { return 0.0; }, p, zero, 1, 0.0), ConfigError);
}

TEST_CASE("finite_diff_check flags a wrong gradient and probes deterministically") {
    const auto l = small_layout();
    auto p = init_params(l, 4);
    auto objective = [](const ParamVector& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += std::sin(q.values[i]) * static_cast<double>(i + 1);
        return s;
    };
    std::vector<double> grad(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) grad[i] = std::cos(p.values[i]) * static_cast<double>(i + 1);
    CHECK(finite_diff_check(objective, p, grad, 10, 1e-5, 1).max_rel_error < 1e-8);
    CHECK(select_probes(grad, 10, 1) == select_probes(grad, 10, 1));
    grad[5] *= 1.01;
    const auto all = finite_diff_check(objective, p, grad, p.size(), 1e-5, 1);
    CHECK(all.max_rel_error > 1e-3);
    CHECK(all.worst_index == 5);
}

TEST_CASE("checkpoints round-trip bitwise") {
    const auto dir = testing::scratch_dir("ckpt");
    const auto l = small_layout();
    auto p = init_params(l, 8);
    p.values[0] = -0.0;
    p.values[1] = 1e-310;
    save_checkpoint(dir / "a.ckpt", p, {{"seed", "3"}, {"mode", "ce_epo"}});
    const auto ck = load_checkpoint(dir / "a.ckpt");
    CHECK(ck.params.layout == l);
    CHECK(std::memcmp(ck.params.values.data(), p.values.data(), p.size() * sizeof(double)) == 0);
    CHECK(ck.meta.at("seed") == "3");
    {
        std::ofstream bad(dir / "bad.ckpt");
        bad << "not a checkpoint\n";
    }
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), Error);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);

    const auto good = [&] {
        std::ifstream in(dir / "a.ckpt", std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    auto write = [&](const std::string& name, const std::string& bytes) {
        std::ofstream(dir / name, std::ios::binary) << bytes;
        return dir / name;
    };
    CHECK_THROWS_AS(load_checkpoint(write("trailing.ckpt", good + "x")), DataError);
    CHECK_THROWS_AS(load_checkpoint(write("truncated.ckpt", good.substr(0, good.size() - 3))), DataError);
}
