#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "facteval/config.hpp"
#include "facteval/corpus.hpp"
#include "facteval/evalharness.hpp"
#include "facteval/scoring.hpp"

namespace facteval::commands {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kPartialFailure = 3,
  kBackendUnreachable = 4,
};

struct ScoreOutcome {
  scoring::RunReport report;
  int exit_code = kOk;
  std::filesystem::path factset_path;
  std::filesystem::path verdicts_path;
  std::filesystem::path report_path;
};

/// ingest: dump -> chunked passage store. Writes <store>.manifest.json
/// beside the store.
corpus::IngestStats cmd_ingest(const std::filesystem::path& dump_path,
                               const std::filesystem::path& store_path,
                               std::size_t chunk_size = corpus::kDefaultChunkSize);

/// score: full AFG -> AFV -> scoring run over a generations file
/// ({topic, input, output} per line). Writes factset.jsonl, verdicts.jsonl,
/// report.json, runlog.jsonl, and manifest.json under output_dir. Inputs are
/// never mutated. Exit code: 0 clean, 3 partial failures, 4 when every
/// attempted backend call failed.
ScoreOutcome cmd_score(const config::RunConfig& config,
                       const std::filesystem::path& generations_path);

struct AfgEvalOutcome {
  std::string scorer;
  double mean_best = 0.0;       // fact-weighted mean over all topics
  std::size_t facts_scored = 0;
  std::vector<std::pair<std::string, double>> per_topic;
  std::vector<std::string> diagnostics;
};

/// eval-afg: best-match similarity between a generated factset file and a
/// human annotation file, aligned by topic. Writes eval_afg_report.json and
/// a manifest under config.output_dir.
AfgEvalOutcome cmd_eval_afg(const config::RunConfig& config,
                            const std::filesystem::path& factset_path,
                            const std::filesystem::path& annotations_path,
                            const std::string& scorer_name);

/// eval-afv: one Error-Rate cell — human FS from the annotation file minus
/// the estimated FS recomputed from a verdicts file.
evalharness::ErCell cmd_eval_afv(const std::filesystem::path& verdicts_path,
                                 const std::filesystem::path& annotations_path,
                                 const std::string& evaluator = "evaluator",
                                 const std::string& subject = "subject");

struct CorrelationPair {
  std::string label_x;
  std::string label_y;
  double pearson = 0.0;
  double spearman = 0.0;
};

struct CorrelationReport {
  std::vector<evalharness::ScoreVector> columns;
  std::vector<CorrelationPair> pairs;
};

/// correlate: Pearson + Spearman for every pair of score columns. Each file
/// holds {"label": ..., "scores": {name: value, ...}}. With a non-empty
/// output_dir, writes correlation_report.json and a manifest there.
CorrelationReport cmd_correlate(const std::vector<std::filesystem::path>& column_files,
                                const std::filesystem::path& output_dir = {});

/// Renders the correlation report: one row per model, one column per score
/// vector, then the pairwise statistics.
std::string render_correlation_table(const CorrelationReport& report);

/// er_report.json plus manifest for a batch of ER cells.
void write_er_report(const std::filesystem::path& output_dir,
                     std::span<const evalharness::ErCell> cells,
                     const std::vector<std::filesystem::path>& inputs);

/// replay: re-run score with every backend replaced by a mock built from a
/// recorded trace file.
ScoreOutcome cmd_replay(const config::RunConfig& config,
                        const std::filesystem::path& generations_path,
                        const std::filesystem::path& trace_path);

/// Manifest written by every command: config snapshot, input digests, seed,
/// tool version. No timestamps, so reruns are byte-identical.
void write_manifest(const std::filesystem::path& output_dir, const std::string& command,
                    const nlohmann::json& config_snapshot,
                    const std::vector<std::filesystem::path>& inputs, std::uint64_t seed);

std::vector<afg::SubjectGeneration> load_generations(const std::filesystem::path& path);

inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace facteval::commands
