#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "facteval/commands.hpp"
#include "facteval/errors.hpp"
#include "facteval/evalharness.hpp"
#include "facteval/io/binary.hpp"

namespace {

using facteval::commands::kBackendUnreachable;
using facteval::commands::kConfigError;
using facteval::commands::kOk;
using facteval::commands::kPartialFailure;

struct CommonOverrides {
  std::string config_path;
  std::string strategy;
  std::string scorer;
  int top_k = -1;
  long long seed = -1;
  std::string trace;
  std::string output_dir;
  std::string model_name;
};

facteval::config::RunConfig resolve_config(const CommonOverrides& overrides) {
  facteval::config::RunConfig config;
  if (!overrides.config_path.empty()) {
    config = facteval::config::load_run_config(overrides.config_path);
  }
  if (!overrides.strategy.empty()) {
    config.strategy = facteval::afv::ValidationStrategy::from_name(overrides.strategy);
  }
  if (!overrides.scorer.empty()) config.scorer = overrides.scorer;
  if (overrides.top_k > 0) config.top_k_passages = static_cast<std::size_t>(overrides.top_k);
  if (overrides.seed >= 0) {
    config.seed = static_cast<std::uint64_t>(overrides.seed);
    config.generation.seed = config.seed;
  }
  if (!overrides.trace.empty()) config.trace_path = overrides.trace;
  if (!overrides.output_dir.empty()) config.output_dir = overrides.output_dir;
  if (!overrides.model_name.empty()) config.subject_model = overrides.model_name;
  return config;
}

void add_common_flags(CLI::App* cmd, CommonOverrides& overrides) {
  cmd->add_option("--config", overrides.config_path, "Run configuration file (key = value)");
  cmd->add_option("--strategy", overrides.strategy, "Validation strategy")
      ->check(CLI::IsMember({"parse", "logits", "ensemble"}));
  cmd->add_option("--scorer", overrides.scorer, "AFG similarity scorer")
      ->check(CLI::IsMember({"token-f1", "embedding-f1"}));
  cmd->add_option("--top-k", overrides.top_k, "Passages retrieved per fact");
  cmd->add_option("--seed", overrides.seed, "Generation seed");
  cmd->add_option("--trace", overrides.trace, "Mirror backend traffic to this file");
  cmd->add_option("--output-dir", overrides.output_dir, "Artifact directory");
  cmd->add_option("--model-name", overrides.model_name, "Subject model name for reports");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factuality evaluation pipeline: atomic fact generation, retrieval-augmented "
               "validation, and scoring"};
  app.require_subcommand(1);

  // ingest
  std::string dump_path;
  std::string store_path;
  std::size_t chunk_size = facteval::corpus::kDefaultChunkSize;
  CLI::App* ingest = app.add_subcommand("ingest", "Chunk a title/text dump into a passage store");
  ingest->add_option("--dump", dump_path, "Line-delimited {title, text} records")->required();
  ingest->add_option("--store", store_path, "Output store file")->required();
  ingest->add_option("--chunk-size", chunk_size, "Max words per passage");

  // score
  CommonOverrides score_overrides;
  std::string generations_path;
  CLI::App* score = app.add_subcommand("score", "Run the full AFG -> AFV -> scoring pipeline");
  score->add_option("--generations", generations_path, "Subject generations (JSONL)")->required();
  add_common_flags(score, score_overrides);

  // eval-afg
  CommonOverrides eval_afg_overrides;
  std::string factset_path;
  std::string afg_annotations_path;
  CLI::App* eval_afg =
      app.add_subcommand("eval-afg", "Best-match similarity of generated facts vs annotations");
  eval_afg->add_option("--factset", factset_path, "Generated factset file")->required();
  eval_afg->add_option("--annotations", afg_annotations_path, "Human annotation file")->required();
  add_common_flags(eval_afg, eval_afg_overrides);

  // eval-afv
  std::vector<std::string> verdict_paths;
  std::vector<std::string> annotation_paths;
  std::vector<std::string> evaluators;
  std::vector<std::string> subjects;
  std::string afv_output_dir;
  CLI::App* eval_afv = app.add_subcommand("eval-afv", "Error Rate of verdicts vs annotations");
  eval_afv->add_option("--verdicts", verdict_paths, "Verdict file(s)")->required();
  eval_afv->add_option("--annotations", annotation_paths, "Annotation file(s), zipped with --verdicts")
      ->required();
  eval_afv->add_option("--evaluator", evaluators, "Evaluator label(s)");
  eval_afv->add_option("--subject", subjects, "Subject label(s)");
  eval_afv->add_option("--output-dir", afv_output_dir, "Directory for er_report.json + manifest");

  // correlate
  std::vector<std::string> column_files;
  std::string correlate_output_dir;
  CLI::App* correlate =
      app.add_subcommand("correlate", "Pearson/Spearman between score columns");
  correlate->add_option("columns", column_files, "Column files: {label, scores}")->required();
  correlate->add_option("--output-dir", correlate_output_dir,
                        "Directory for correlation_report.json + manifest");

  // replay
  CommonOverrides replay_overrides;
  std::string replay_generations;
  std::string replay_trace;
  CLI::App* replay = app.add_subcommand("replay", "Re-run score from a recorded trace");
  replay->add_option("--generations", replay_generations, "Subject generations (JSONL)")
      ->required();
  replay->add_option("--trace-file", replay_trace, "Recorded trace to replay")->required();
  add_common_flags(replay, replay_overrides);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      facteval::corpus::IngestStats stats =
          facteval::commands::cmd_ingest(dump_path, store_path, chunk_size);
      std::printf("documents: %zu\npassages: %zu\nskipped: %zu\nduplicates: %zu\n",
                  stats.documents, stats.passages, stats.skipped, stats.duplicates);
      return kOk;
    }

    if (*score) {
      facteval::config::RunConfig config = resolve_config(score_overrides);
      facteval::commands::ScoreOutcome outcome =
          facteval::commands::cmd_score(config, generations_path);
      std::cout << facteval::scoring::render_table(outcome.report);
      std::cout << "artifacts: " << outcome.report_path.string() << "\n";
      return outcome.exit_code;
    }

    if (*eval_afg) {
      facteval::config::RunConfig config = resolve_config(eval_afg_overrides);
      facteval::commands::AfgEvalOutcome outcome = facteval::commands::cmd_eval_afg(
          config, factset_path, afg_annotations_path, config.scorer);
      std::printf("scorer: %s\nmean_best_match: %.4f\nfacts_scored: %zu\n",
                  outcome.scorer.c_str(), outcome.mean_best, outcome.facts_scored);
      for (const auto& [topic, score_value] : outcome.per_topic) {
        std::printf("  %-32s %.4f\n", topic.c_str(), score_value);
      }
      for (const std::string& d : outcome.diagnostics) std::printf("note: %s\n", d.c_str());
      return kOk;
    }

    if (*eval_afv) {
      if (annotation_paths.size() != verdict_paths.size()) {
        std::fprintf(stderr, "--verdicts and --annotations must pair up\n");
        return kConfigError;
      }
      std::vector<facteval::evalharness::ErCell> cells;
      for (std::size_t i = 0; i < verdict_paths.size(); ++i) {
        std::string evaluator = i < evaluators.size() ? evaluators[i] : "evaluator";
        std::string subject = i < subjects.size() ? subjects[i] : ("subject" + std::to_string(i));
        cells.push_back(facteval::commands::cmd_eval_afv(verdict_paths[i], annotation_paths[i],
                                                         evaluator, subject));
      }
      for (const facteval::evalharness::ErCell& cell : cells) {
        std::printf("%s / %s: human FS %.2f, estimated FS %.2f, ER %.2f\n",
                    cell.evaluator.c_str(), cell.subject.c_str(), cell.human_fs,
                    cell.estimated_fs, cell.er);
      }
      if (cells.size() > 1) std::cout << facteval::evalharness::render_er_table(cells);
      if (!afv_output_dir.empty()) {
        std::vector<std::filesystem::path> inputs;
        for (const auto& p : verdict_paths) inputs.emplace_back(p);
        for (const auto& p : annotation_paths) inputs.emplace_back(p);
        facteval::commands::write_er_report(afv_output_dir, cells, inputs);
      }
      return kOk;
    }

    if (*correlate) {
      std::vector<std::filesystem::path> paths(column_files.begin(), column_files.end());
      facteval::commands::CorrelationReport report =
          facteval::commands::cmd_correlate(paths, correlate_output_dir);
      std::cout << facteval::commands::render_correlation_table(report);
      return kOk;
    }

    if (*replay) {
      facteval::config::RunConfig config = resolve_config(replay_overrides);
      facteval::commands::ScoreOutcome outcome =
          facteval::commands::cmd_replay(config, replay_generations, replay_trace);
      std::cout << facteval::scoring::render_table(outcome.report);
      return outcome.exit_code;
    }
  } catch (const facteval::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const facteval::TransportError& e) {
    std::fprintf(stderr, "backend unreachable: %s\n", e.what());
    return kBackendUnreachable;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPartialFailure;
  }
  return kOk;
}
