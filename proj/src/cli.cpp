#include "paretoscl/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>

#include "paretoscl/errors.hpp"
#include "paretoscl/paretolab.hpp"
#include "paretoscl/report.hpp"
#include "paretoscl/trainer.hpp"

namespace paretoscl {

namespace {

struct Invocation {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::string checkpoint;
    std::optional<std::uint64_t> eval_seed;
};

ConfigStore load_store(const Invocation& inv) {
    auto store = inv.config_path.empty() ? ConfigStore() : ConfigStore::from_file(inv.config_path);
    for (const auto& o : inv.overrides) store.set(o);
    return store;
}

std::string seed_stem(std::uint64_t seed) { return "seed-" + std::to_string(seed); }

int cmd_train(const Invocation& inv, std::ostream& out) {
    const auto store = load_store(inv);
    const auto config = store.resolve();
    const std::filesystem::path dir = inv.out_dir;
    write_config_echo(dir, store);
    const auto data = load_data(config);

    ensure_output_dir(dir / "splits");
    for (const auto seed : config.seeds) write_split_manifest(dir / "splits", seed_stem(seed), make_split(config, data, seed));
    ensure_output_dir(dir / "checkpoints");
    if (config.dump_embeddings) ensure_output_dir(dir / "embeddings");

    const auto digest = config_digest(config);
    RunOptions options;
    options.on_seed_done = [&](const SeedResult& r, const Encoder& encoder, const ParamVector& best) {
        const auto rel = std::filesystem::path("checkpoints") / (seed_stem(r.seed) + ".ckpt");
        std::ostringstream acc;
        acc.precision(17);
        acc << r.test_accuracy;
        save_checkpoint(dir / rel, best,
                        {{"mode", to_string(config.mode)},
                         {"seed", std::to_string(r.seed)},
                         {"best_step", std::to_string(r.best_step)},
                         {"test_accuracy", acc.str()},
                         {"config_digest", digest},
                         {"dataset_digest", data.digest},
                         {"hash_dim", std::to_string(config.vectorizer.hash_dim)},
                         {"ngram_max", std::to_string(config.vectorizer.ngram_max)},
                         {"hash_seed", std::to_string(config.vectorizer.hash_seed)},
                         {"labels", [&] {
                              std::string joined;
                              for (const auto& l : data.train.labels) joined += (joined.empty() ? "" : ",") + l;
                              return joined;
                          }()}});
        if (config.dump_embeddings) {
            const auto& split = r.split;
            write_embeddings(dir / "embeddings" / (seed_stem(r.seed) + ".tsv"), split.test,
                             data.dataset(split.test_source),
                             embed(encoder, best, split.test, data.features(split.test_source)));
        }
        return rel.generic_string();
    };
    const auto report = run_experiment(config, data, options);
    write_run_report(dir, report);

    out << "mode " << report.mode << ": test accuracy " << std::fixed << std::setprecision(4) << report.mean
        << " ± " << report.std << " over " << report.completed << '/' << report.seeds.size() << " seeds\n";
    for (const auto& f : report.flags) out << "flag: " << f << '\n';
    for (const auto& s : report.seeds) {
        if (!s.ok) out << "seed " << s.seed << " failed: " << s.error << '\n';
    }
    return report.completed == 0 ? kExitRuntime : kExitOk;
}

int cmd_eval(const Invocation& inv, std::ostream& out) {
    const auto store = load_store(inv);
    const auto config = store.resolve();
    const std::filesystem::path dir = inv.out_dir;
    write_config_echo(dir, store);
    const auto ckpt = load_checkpoint(inv.checkpoint);
    std::uint64_t seed = 0;
    if (inv.eval_seed) {
        seed = *inv.eval_seed;
    } else if (auto it = ckpt.meta.find("seed"); it != ckpt.meta.end()) {
        seed = std::stoull(it->second);
    } else {
        throw UsageError("checkpoint carries no seed; pass --seed");
    }
    const auto data = load_data(config);
    const Encoder encoder(encoder_shape(config, data.train.num_classes()));
    if (!(encoder.layout() == ckpt.params.layout)) {
        throw ConfigError("checkpoint shape does not match the configured model sizes");
    }
    const auto split = make_split(config, data, seed);
    const double val = evaluate(encoder, ckpt.params, split.validation, data.features(split.validation_source),
                                data.dataset(split.validation_source));
    const double test =
        evaluate(encoder, ckpt.params, split.test, data.features(split.test_source), data.dataset(split.test_source));
    const nlohmann::ordered_json summary{{"schema", kSummarySchema},
                                         {"kind", "eval"},
                                         {"checkpoint", inv.checkpoint},
                                         {"seed", seed},
                                         {"dataset_digest", data.digest},
                                         {"validation_accuracy", val},
                                         {"test_accuracy", test}};
    std::ofstream f(dir / "summary.json", std::ios::binary);
    f << summary.dump(2) << '\n';
    if (!f) throw IoError("cannot write " + (dir / "summary.json").string());
    out << std::fixed << std::setprecision(4) << "validation accuracy " << val << "\ntest accuracy " << test << '\n';
    return kExitOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out) {
    const auto store = load_store(inv);
    const auto config = store.resolve();
    const std::filesystem::path dir = inv.out_dir;
    write_config_echo(dir, store);
    const auto data = load_data(config);
    const auto report = sweep(config, data);
    write_sweep_report(dir, report);
    out << report.cells.size() << " cells\n";
    if (!report.best) {
        out << "every cell failed\n";
        return kExitRuntime;
    }
    const auto& b = report.cells[*report.best];
    out << std::setprecision(17) << "best: tau=" << b.tau << " lambda=" << b.lambda;
    if (b.r1) out << " r1=" << *b.r1;
    out << std::fixed << std::setprecision(4) << " validation " << b.validation_mean << " test " << b.test_mean
        << " ± " << b.test_std << '\n';
    return kExitOk;
}

int cmd_toy(const Invocation& inv, std::ostream& out) {
    const auto store = load_store(inv);
    // experiment.mode does not apply to the toy problem; only the toy solver constrains r.
    auto unmoded = store;
    unmoded.set("experiment.mode", "ce");
    const auto config = unmoded.resolve();
    const std::filesystem::path dir = inv.out_dir;
    write_config_echo(dir, store);
    if (config.toy.solver == ToySolver::epo) config.r.require_strictly_positive();
    const ToyProblem problem(config.toy.dim);
    ToyRunSettings settings;
    settings.steps = config.toy.steps;
    settings.step_size = config.toy.step_size;
    settings.epsilon_balance = config.epsilon_balance;
    const auto trace = run_toy(problem, config.toy.solver, config.r,
                               random_init(config.toy.dim, config.toy.init_radius, config.toy.init_seed), settings);
    write_toy_report(dir, trace, config.r, store.digest());
    const auto front = front_samples(problem);
    const bool on_front = front_dominance_check(trace.final_point, front, 1e-3);
    out << std::setprecision(6) << "solver " << to_string(trace.solver) << " r=(" << config.r[0] << ", "
        << config.r[1] << ")\nfinal f=(" << trace.final_point[0] << ", " << trace.final_point[1]
        << ") ray gap " << trace.final_ray_gap << " non-dominated " << (on_front ? "yes" : "no") << '\n';
    return kExitOk;
}

int cmd_gradcheck(const Invocation& inv, std::ostream& out) {
    const auto store = load_store(inv);
    const auto config = store.resolve();
    if (!inv.out_dir.empty()) write_config_echo(inv.out_dir, store);
    const auto result = run_gradient_suite(config.gradcheck, config.tau, config.lambda);
    for (const auto& l : result.losses) {
        out << std::left << std::setw(7) << l.loss << " max relative error " << std::scientific
            << std::setprecision(3) << l.worst.max_rel_error << " over " << l.probes << " probes\n";
    }
    out << (result.passed() ? "PASS" : "FAIL") << " (tolerance " << result.tolerance << ")\n";
    if (!inv.out_dir.empty()) write_gradcheck_report(inv.out_dir, result);
    return result.passed() ? kExitOk : kExitRuntime;
}

int cmd_split(const Invocation& inv, std::ostream& out) {
    const auto store = load_store(inv);
    const auto config = store.resolve();
    const std::filesystem::path dir = inv.out_dir;
    write_config_echo(dir, store);
    const auto data = load_data(config);
    for (const auto seed : config.seeds) {
        const auto split = make_split(config, data, seed);
        write_split_manifest(dir, seed_stem(seed), split);
        out << seed_stem(seed) << ": train " << split.train.size() << " validation " << split.validation.size()
            << " test " << split.test.size() << '\n';
    }
    out << "dataset digest " << data.digest << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Contrastive few-shot text classification with Pareto-weighted objectives"};
    app.require_subcommand(1);
    Invocation inv;

    auto add_common = [&](CLI::App* sub, bool needs_config, bool needs_out) {
        auto* c = sub->add_option("-c,--config", inv.config_path, "configuration file (INI)");
        if (needs_config) c->required();
        auto* o = sub->add_option("-o,--out", inv.out_dir, "output directory");
        if (needs_out) o->required();
        sub->add_option("-s,--set", inv.overrides, "override key=value (bare or section.key)")->take_all();
    };
    auto* train = app.add_subcommand("train", "train every configured seed and report mean/std test accuracy");
    add_common(train, true, true);
    auto* eval = app.add_subcommand("eval", "evaluate a saved checkpoint on its seed's validation and test ids");
    add_common(eval, true, true);
    eval->add_option("--checkpoint", inv.checkpoint, "checkpoint file")->required();
    eval->add_option("--seed", inv.eval_seed, "split seed (default: the seed stored in the checkpoint)");
    auto* sweep_cmd = app.add_subcommand("sweep", "grid search over tau, lambda and r1");
    add_common(sweep_cmd, true, true);
    auto* toy = app.add_subcommand("toy", "run a solver on the two-objective toy problem");
    add_common(toy, false, true);
    auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every objective's gradient");
    add_common(grad, false, false);
    auto* split = app.add_subcommand("split", "materialize the per-seed splits without training");
    add_common(split, true, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(inv, out);
        if (eval->parsed()) return cmd_eval(inv, out);
        if (sweep_cmd->parsed()) return cmd_sweep(inv, out);
        if (toy->parsed()) return cmd_toy(inv, out);
        if (grad->parsed()) return cmd_gradcheck(inv, out);
        if (split->parsed()) return cmd_split(inv, out);
    } catch (const ConfigError& e) {
        err << "error: invalid configuration";
        if (!e.key().empty()) err << " (key '" << e.key() << "')";
        err << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error [" << e.kind() << "]: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace paretoscl
