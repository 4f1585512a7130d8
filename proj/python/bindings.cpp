#include <filesystem>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "paretoscl/config.hpp"
#include "paretoscl/contrastive.hpp"
#include "paretoscl/errors.hpp"
#include "paretoscl/gradsuite.hpp"
#include "paretoscl/moo.hpp"
#include "paretoscl/paretolab.hpp"
#include "paretoscl/synthetic.hpp"
#include "paretoscl/trainer.hpp"
#include "paretoscl/vectorizer.hpp"

namespace py = pybind11;
using namespace paretoscl;

namespace {

ObjectivePoint point(const std::array<double, 2>& a) { return {a[0], a[1]}; }

ConfigStore store_from(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
    auto store = path ? ConfigStore::from_file(*path) : ConfigStore();
    for (const auto& o : overrides) store.set(o);
    return store;
}

ClassBlockedBatch batch_from(const std::vector<Eigen::MatrixXd>& blocks, double tau) {
    ClassBlockedBatch b;
    b.tau = tau;
    std::size_t id = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        ClassBlock block;
        block.label = static_cast<int>(k);
        block.rows = blocks[k];
        for (Eigen::Index i = 0; i < blocks[k].rows(); ++i) block.ids.push_back(id++);
        b.blocks.push_back(std::move(block));
    }
    return b;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contrastive objectives, Pareto weight solvers and the few-shot training loop.";

    static PyObject* config_error = nullptr;
    py::register_exception<Error>(m, "ParetoError", PyExc_RuntimeError);
    config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError).ptr();
    // Registered last, so it runs first: prefixes the offending key.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            const std::string msg = e.key().empty() ? e.what() : e.key() + ": " + e.what();
            PyErr_SetString(config_error, msg.c_str());
        }
    });

    m.def(
        "vectorize",
        [](const std::string& text, std::optional<std::string> text2, std::uint32_t hash_dim, int ngram_max,
           std::uint64_t hash_seed) {
            const auto f = vectorize(text, text2, {hash_dim, ngram_max, hash_seed});
            return py::make_tuple(f.indices, f.weights);
        },
        py::arg("text"), py::arg("text2") = py::none(), py::arg("hash_dim") = 16384, py::arg("ngram_max") = 2,
        py::arg("hash_seed") = 0, "Hashed n-gram features as (indices, weights); weights have unit L2 norm.");

    m.def(
        "contrastive_losses",
        [](const std::vector<Eigen::MatrixXd>& blocks, double tau) {
            const auto b = batch_from(blocks, tau);
            return py::dict(py::arg("pos") = loss_pos(b).value, py::arg("neg") = loss_neg(b).value);
        },
        py::arg("blocks"), py::arg("tau"), "Positive and negative losses of unit-row embeddings, one block per class.");

    m.def(
        "cross_entropy",
        [](const Eigen::MatrixXd& logits, const std::vector<int>& labels) { return cross_entropy(logits, labels).value; },
        py::arg("logits"), py::arg("labels"));

    m.def(
        "non_uniformity",
        [](std::array<double, 2> loss, std::array<double, 2> r) {
            return non_uniformity(point(loss), PreferenceVector(r[0], r[1])).mu;
        },
        py::arg("loss"), py::arg("r"));

    m.def(
        "ray_gap", [](std::array<double, 2> loss, std::array<double, 2> r) {
            return ray_gap(point(loss), PreferenceVector(r[0], r[1]));
        },
        py::arg("loss"), py::arg("r"));

    m.def(
        "min_norm_weights",
        [](const std::vector<double>& g1, const std::vector<double>& g2) { return min_norm_weights(g1, g2).beta; },
        py::arg("g1"), py::arg("g2"));

    m.def(
        "epo_weights",
        [](std::array<double, 2> loss, const std::vector<double>& g1, const std::vector<double>& g2,
           std::array<double, 2> r, double epsilon_balance) {
            const auto w = epo_weights(point(loss), g1, g2, PreferenceVector(r[0], r[1]), epsilon_balance);
            return py::make_tuple(w.beta, std::string(to_string(w.mode)));
        },
        py::arg("loss"), py::arg("g1"), py::arg("g2"), py::arg("r"), py::arg("epsilon_balance") = 1e-5,
        "Returns (beta, mode) with mode 'balance' or 'descent'.");

    m.def(
        "run_toy",
        [](const std::string& solver, std::array<double, 2> r, std::size_t dim, long steps, double step_size,
           std::uint64_t init_seed, double init_radius) {
            ToyRunSettings s;
            s.steps = steps;
            s.step_size = step_size;
            const ToyProblem problem(dim);
            const auto solver_kind = parse_toy_solver(solver);
            const PreferenceVector pref(r[0], r[1]);
            SolverTrace tr;
            bool non_dominated = false;
            {
                py::gil_scoped_release release;
                tr = run_toy(problem, solver_kind, pref, random_init(dim, init_radius, init_seed), s);
                non_dominated = front_dominance_check(tr.final_point, front_samples(problem), 1e-3);
            }
            std::vector<double> f1, f2, gap;
            for (const auto& st : tr.steps) {
                f1.push_back(st.f[0]);
                f2.push_back(st.f[1]);
                gap.push_back(st.ray_gap);
            }
            return py::dict(py::arg("final_point") = std::array<double, 2>{tr.final_point[0], tr.final_point[1]},
                            py::arg("final_ray_gap") = tr.final_ray_gap, py::arg("non_dominated") = non_dominated,
                            py::arg("f1") = f1, py::arg("f2") = f2, py::arg("ray_gap") = gap);
        },
        py::arg("solver"), py::arg("r"), py::arg("dim") = 20, py::arg("steps") = 2000, py::arg("step_size") = 0.05,
        py::arg("init_seed") = 0, py::arg("init_radius") = 2.0);

    m.def(
        "front_samples",
        [](std::size_t dim, std::size_t count) {
            const auto s = front_samples(ToyProblem(dim), count);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(s.size()), 2);
            for (std::size_t i = 0; i < s.size(); ++i) {
                out(static_cast<Eigen::Index>(i), 0) = s[i][0];
                out(static_cast<Eigen::Index>(i), 1) = s[i][1];
            }
            return out;
        },
        py::arg("dim") = 20, py::arg("count") = 10000);

    m.def(
        "gradient_suite",
        [](std::size_t batches, std::size_t probes, double tau, double lambda) {
            GradcheckConfig cfg;
            cfg.batches = batches;
            cfg.probes = probes;
            const auto r = run_gradient_suite(cfg, tau, lambda);
            std::map<std::string, double> worst;
            for (const auto& l : r.losses) worst[l.loss] = l.worst.max_rel_error;
            return std::make_pair(r.passed(), worst);
        },
        py::arg("batches") = 20, py::arg("probes") = 50, py::arg("tau") = 0.3, py::arg("lambda_") = 0.5,
        py::call_guard<py::gil_scoped_release>(), "Returns (passed, {loss: max relative error}).");

    m.def(
        "resolve_config",
        [](std::optional<std::string> path, const std::vector<std::string>& overrides) {
            const auto store = store_from(path, overrides);
            store.resolve();
            std::map<std::string, std::string> out;
            for (const auto& k : config_schema()) out[k.key] = store.get(k.key);
            return out;
        },
        py::arg("path") = py::none(), py::arg("overrides") = std::vector<std::string>{},
        "Validated configuration as {section.key: value}.");

    m.def(
        "write_two_cluster_task",
        [](const std::string& directory, std::uint64_t seed, std::size_t train_size, std::size_t dev_size) {
            TwoClusterSettings s;
            s.train_size = train_size;
            s.dev_size = dev_size;
            const auto task = make_two_cluster_task(s, seed);
            const std::filesystem::path dir(directory);
            std::filesystem::create_directories(dir);
            write_tsv(dir / "train.tsv", task.train);
            write_tsv(dir / "dev.tsv", task.dev);
        },
        py::arg("directory"), py::arg("seed") = 0, py::arg("train_size") = 200, py::arg("dev_size") = 400,
        "Writes train.tsv and dev.tsv of the two-cluster synthetic task.");

    m.def(
        "run_synthetic",
        [](const std::vector<std::string>& overrides, std::uint64_t task_seed, std::size_t train_size,
           std::size_t dev_size) {
            const auto config = store_from(std::nullopt, overrides).resolve();
            TwoClusterSettings s;
            s.train_size = train_size;
            s.dev_size = dev_size;
            auto task = make_two_cluster_task(s, task_seed);
            const auto data = prepare_data(std::move(task.train), std::move(task.dev), config.vectorizer);
            const auto report = run_experiment(config, data, RunOptions{false, {}});
            std::vector<double> acc;
            for (const auto& seed : report.seeds) acc.push_back(seed.ok ? seed.test_accuracy : -1.0);
            return std::make_tuple(report.mean, report.std, acc, report.flags);
        },
        py::arg("overrides") = std::vector<std::string>{}, py::arg("task_seed") = 0, py::arg("train_size") = 200,
        py::arg("dev_size") = 400, py::call_guard<py::gil_scoped_release>(),
        "Trains on the two-cluster synthetic task; returns (mean, std, per-seed accuracy, flags).");
}
