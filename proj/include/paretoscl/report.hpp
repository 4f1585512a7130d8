#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "paretoscl/config.hpp"
#include "paretoscl/gradsuite.hpp"
#include "paretoscl/paretolab.hpp"
#include "paretoscl/trainer.hpp"

namespace paretoscl {

inline constexpr const char* kMetricsSchema = "paretoscl.metrics/1";
inline constexpr const char* kSummarySchema = "paretoscl.summary/1";
inline constexpr const char* kEmbeddingsSchema = "paretoscl.embeddings/1";

/// Creates `dir` if needed; IoError when it cannot be created or written.
void ensure_output_dir(const std::filesystem::path& dir);

/// Writes `config.ini` (canonical echo of every key) into `dir`.
void write_config_echo(const std::filesystem::path& dir, const ConfigStore& store);

/// `metrics.jsonl`: a header record, then one record per training step.
/// `summary.json`: mean, std, digests, flags and one entry per configured seed.
void write_run_report(const std::filesystem::path& dir, const RunReport& report);

/// Same file pair for a toy solver trace.
void write_toy_report(const std::filesystem::path& dir, const SolverTrace& trace, const PreferenceVector& r,
                      const std::string& config_digest);

/// `metrics.jsonl` with one record per grid cell; `summary.json` names the selected cell.
void write_sweep_report(const std::filesystem::path& dir, const SweepReport& report);

void write_gradcheck_report(const std::filesystem::path& dir, const GradSuiteResult& result);

/// Tab-separated `id label e0 … e{d-1}` with a `#`-prefixed schema line and a header row.
void write_embeddings(const std::filesystem::path& path, std::span<const std::size_t> ids, const Dataset& dataset,
                      const Eigen::MatrixXd& embeddings);

}  // namespace paretoscl
