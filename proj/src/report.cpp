#include "paretoscl/report.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "paretoscl/errors.hpp"

namespace paretoscl {

namespace {

using Json = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void write_jsonl(const std::filesystem::path& path, const Json& header, const std::vector<Json>& records) {
    std::string text = header.dump() + '\n';
    for (const auto& r : records) text += r.dump() + '\n';
    write_text(path, text);
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + '\n'); }

Json loss_json(const LossVector& l) { return Json{{"pos", l.pos}, {"neg", l.neg}, {"ce", l.ce}}; }

}  // namespace

void ensure_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    }
}

void write_config_echo(const std::filesystem::path& dir, const ConfigStore& store) {
    ensure_output_dir(dir);
    write_text(dir / "config.ini", "# digest " + store.digest() + "\n" + store.dump());
}

void write_run_report(const std::filesystem::path& dir, const RunReport& report) {
    ensure_output_dir(dir);
    const Json header{{"record", "header"},
                      {"schema", kMetricsSchema},
                      {"kind", "run"},
                      {"mode", report.mode},
                      {"config_digest", report.config_digest},
                      {"dataset_digest", report.dataset_digest}};
    std::vector<Json> records;
    records.reserve(report.trace.size());
    for (const auto& s : report.trace) {
        Json r{{"record", "step"},
               {"seed", s.seed},
               {"step", s.step},
               {"loss", loss_json(s.loss)},
               {"weights", {s.weights[0], s.weights[1]}},
               {"weight_mode", s.weight_mode},
               {"ce_only", s.ce_only}};
        if (s.validation_accuracy) r["validation_accuracy"] = *s.validation_accuracy;
        records.push_back(std::move(r));
    }
    write_jsonl(dir / "metrics.jsonl", header, records);

    Json per_seed = Json::array();
    for (const auto& s : report.seeds) {
        Json e{{"seed", s.seed}, {"status", s.ok ? "ok" : "failed"}};
        if (s.ok) {
            e["test_accuracy"] = s.test_accuracy;
            e["best_validation_accuracy"] = s.best_validation_accuracy;
            e["best_step"] = s.best_step;
            e["train_size"] = s.split.train.size();
            e["validation_size"] = s.split.validation.size();
            e["test_size"] = s.split.test.size();
            if (!s.checkpoint.empty()) e["checkpoint"] = s.checkpoint;
        } else {
            e["error"] = s.error;
        }
        per_seed.push_back(std::move(e));
    }
    const Json summary{{"schema", kSummarySchema},
                       {"kind", "run"},
                       {"mode", report.mode},
                       {"config_digest", report.config_digest},
                       {"dataset_digest", report.dataset_digest},
                       {"seeds", report.seeds.size()},
                       {"completed", report.completed},
                       {"mean", report.mean},
                       {"std", report.std},
                       {"validation_mean", report.validation_mean},
                       {"flags", report.flags},
                       {"per_seed", per_seed}};
    write_json(dir / "summary.json", summary);
}

void write_toy_report(const std::filesystem::path& dir, const SolverTrace& trace, const PreferenceVector& r,
                      const std::string& config_digest) {
    ensure_output_dir(dir);
    const Json header{{"record", "header"},
                      {"schema", kMetricsSchema},
                      {"kind", "toy"},
                      {"solver", to_string(trace.solver)},
                      {"preference", {r[0], r[1]}},
                      {"config_digest", config_digest}};
    std::vector<Json> records;
    records.reserve(trace.steps.size());
    for (const auto& s : trace.steps) {
        Json rec{{"record", "step"},
                 {"step", s.step},
                 {"f1", s.f[0]},
                 {"f2", s.f[1]},
                 {"weights", {s.weights[0], s.weights[1]}},
                 {"mode", s.mode},
                 {"ray_gap", s.ray_gap},
                 {"theta_digest", hex_digest(s.theta_digest)}};
        rec["mu"] = s.mu ? Json(*s.mu) : Json(nullptr);
        records.push_back(std::move(rec));
    }
    write_jsonl(dir / "metrics.jsonl", header, records);
    const Json summary{{"schema", kSummarySchema},
                       {"kind", "toy"},
                       {"solver", to_string(trace.solver)},
                       {"preference", {r[0], r[1]}},
                       {"config_digest", config_digest},
                       {"steps", trace.steps.size()},
                       {"final_point", {trace.final_point[0], trace.final_point[1]}},
                       {"final_ray_gap", trace.final_ray_gap},
                       {"final_stationarity", trace.final_stationarity}};
    write_json(dir / "summary.json", summary);
}

void write_sweep_report(const std::filesystem::path& dir, const SweepReport& report) {
    ensure_output_dir(dir);
    const Json header{{"record", "header"},
                      {"schema", kMetricsSchema},
                      {"kind", "sweep"},
                      {"mode", report.mode},
                      {"dataset_digest", report.dataset_digest}};
    std::vector<Json> records;
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        const auto& c = report.cells[i];
        Json r{{"record", "cell"},
               {"index", i},
               {"tau", c.tau},
               {"lambda", c.lambda},
               {"r1", c.r1 ? Json(*c.r1) : Json(nullptr)},
               {"status", c.ok ? "ok" : "failed"},
               {"completed", c.completed},
               {"validation_mean", c.validation_mean},
               {"test_mean", c.test_mean},
               {"test_std", c.test_std},
               {"config_digest", c.config_digest}};
        if (!c.ok) r["error"] = c.error;
        records.push_back(std::move(r));
    }
    write_jsonl(dir / "metrics.jsonl", header, records);
    Json summary{{"schema", kSummarySchema},
                 {"kind", "sweep"},
                 {"mode", report.mode},
                 {"dataset_digest", report.dataset_digest},
                 {"cells", report.cells.size()}};
    if (report.best) {
        const auto& b = report.cells[*report.best];
        summary["best"] = Json{{"index", *report.best},
                               {"tau", b.tau},
                               {"lambda", b.lambda},
                               {"r1", b.r1 ? Json(*b.r1) : Json(nullptr)},
                               {"validation_mean", b.validation_mean},
                               {"test_mean", b.test_mean},
                               {"test_std", b.test_std},
                               {"config_digest", b.config_digest}};
    } else {
        summary["best"] = nullptr;
    }
    write_json(dir / "summary.json", summary);
}

void write_gradcheck_report(const std::filesystem::path& dir, const GradSuiteResult& result) {
    ensure_output_dir(dir);
    Json losses = Json::array();
    for (const auto& l : result.losses) {
        losses.push_back(Json{{"loss", l.loss},
                              {"max_rel_error", l.worst.max_rel_error},
                              {"worst_index", l.worst.worst_index},
                              {"worst_numeric", l.worst.worst_numeric},
                              {"worst_analytic", l.worst.worst_analytic},
                              {"probes", l.probes}});
    }
    const Json summary{{"schema", kSummarySchema},
                       {"kind", "gradcheck"},
                       {"batches", result.batches},
                       {"tolerance", result.tolerance},
                       {"passed", result.passed()},
                       {"losses", losses}};
    write_json(dir / "summary.json", summary);
}

void write_embeddings(const std::filesystem::path& path, std::span<const std::size_t> ids, const Dataset& dataset,
                      const Eigen::MatrixXd& embeddings) {
    if (static_cast<std::size_t>(embeddings.rows()) != ids.size()) {
        throw ContractViolation("embedding rows do not match ids");
    }
    std::ostringstream os;
    os.precision(17);
    os << "# " << kEmbeddingsSchema << '\n' << "id\tlabel";
    for (Eigen::Index j = 0; j < embeddings.cols(); ++j) os << "\te" << j;
    os << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        os << ids[i] << '\t' << dataset.labels.at(static_cast<std::size_t>(dataset.rows.at(ids[i]).label));
        for (Eigen::Index j = 0; j < embeddings.cols(); ++j) os << '\t' << embeddings(static_cast<Eigen::Index>(i), j);
        os << '\n';
    }
    write_text(path, os.str());
}

}  // namespace paretoscl
