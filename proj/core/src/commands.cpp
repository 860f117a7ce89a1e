#include "facteval/commands.hpp"

#include <algorithm>
#include <cstdio>

#include "facteval/embedding_retrieval.hpp"
#include "facteval/errors.hpp"
#include "facteval/io/binary.hpp"
#include "facteval/io/jsonl.hpp"
#include "facteval/retrieval.hpp"
#include "facteval/util/hash.hpp"

namespace facteval::commands {

namespace {

nlohmann::json run_log_json(const backends::RunLog& log) {
  nlohmann::json out = nlohmann::json::array();
  for (const backends::RequestLogEntry& e : log.snapshot()) {
    out.push_back({{"kind", e.kind},
                   {"digest", e.digest},
                   {"retries", e.retries},
                   {"latency_ms", e.latency_ms},
                   {"status", e.status}});
  }
  return out;
}

}  // namespace

std::vector<afg::SubjectGeneration> load_generations(const std::filesystem::path& path) {
  std::vector<afg::SubjectGeneration> out;
  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (!record.contains("topic") || !record["topic"].is_string() ||
        record["topic"].get_ref<const std::string&>().empty()) {
      throw ConfigError("generations " + path.string() + " line " + std::to_string(line) +
                        ": topic required");
    }
    out.push_back(afg::SubjectGeneration{record["topic"].get<std::string>(),
                                         record.value("input", std::string()),
                                         record.value("output", std::string())});
  });
  if (out.empty()) throw ConfigError("generations file " + path.string() + " is empty");
  return out;
}

void write_manifest(const std::filesystem::path& output_dir, const std::string& command,
                    const nlohmann::json& config_snapshot,
                    const std::vector<std::filesystem::path>& inputs, std::uint64_t seed) {
  nlohmann::json digests = nlohmann::json::object();
  for (const std::filesystem::path& p : inputs) {
    if (std::filesystem::exists(p)) digests[p.string()] = hash::file_digest(p.string());
  }
  nlohmann::json manifest = {
      {"command", command},
      {"config", config_snapshot},
      {"input_digests", digests},
      {"seed", seed},
      {"tool_version", std::string(kToolVersion)},
  };
  io::atomic_write_file(output_dir / "manifest.json", manifest.dump(2) + "\n");
}

corpus::IngestStats cmd_ingest(const std::filesystem::path& dump_path,
                               const std::filesystem::path& store_path,
                               std::size_t chunk_size) {
  corpus::IngestStats stats = corpus::ingest_dump(dump_path, store_path, chunk_size);
  nlohmann::json snapshot = {
      {"dump_path", dump_path.string()},
      {"store_path", store_path.string()},
      {"chunk_size", chunk_size},
  };
  nlohmann::json digests = nlohmann::json::object();
  digests[dump_path.string()] = hash::file_digest(dump_path.string());
  nlohmann::json manifest = {
      {"command", "ingest"},
      {"config", snapshot},
      {"input_digests", digests},
      {"seed", 0},
      {"tool_version", std::string(kToolVersion)},
  };
  std::filesystem::path manifest_path = store_path;
  manifest_path += ".manifest.json";
  io::atomic_write_file(manifest_path, manifest.dump(2) + "\n");
  return stats;
}

ScoreOutcome cmd_score(const config::RunConfig& config,
                       const std::filesystem::path& generations_path) {
  config::validate_for_score(config);
  std::vector<afg::SubjectGeneration> generations = load_generations(generations_path);

  corpus::PassageStore store = corpus::PassageStore::open(config.kb_store_path);
  std::vector<afg::DemoEntry> demo_pool = afg::load_demo_pool(config.demo_pool_path);

  std::unique_ptr<backends::Backend> afg_backend =
      config::make_backend(config.afg_backend, config.trace_path);
  std::unique_ptr<backends::Backend> afv_backend =
      config::make_backend(config.afv_backend, config.trace_path);
  std::unique_ptr<backends::Backend> embedding_backend;
  if (config.embedding_backend) {
    embedding_backend = config::make_backend(*config.embedding_backend, config.trace_path);
  }

  std::unique_ptr<retrieval::PassageRetriever> retriever;
  if (config.retrieval_mode == "embedding") {
    if (!embedding_backend) throw ConfigError("embedding retrieval requires embedding_backend");
    retriever =
        std::make_unique<retrieval::EmbeddingPassageIndex>(store.all(), *embedding_backend);
  } else {
    retriever = std::make_unique<retrieval::PassageIndex>(store.all());
  }

  afg::AfgOptions afg_options;
  afg_options.abstention_patterns = config.abstention_patterns;
  afg_options.strip_reasoning = config.strip_reasoning;
  afg_options.reasoning_open = config.reasoning_open;
  afg_options.reasoning_close = config.reasoning_close;

  std::vector<afg::FactSet> factsets;
  std::vector<scoring::TopicReport> topic_reports;
  std::vector<nlohmann::json> verdict_records;

  for (const afg::SubjectGeneration& generation : generations) {
    afg::FactSet facts = afg::generate_facts(*afg_backend, generation, demo_pool,
                                             config.generation, afg_options);
    std::vector<afv::ValidatedFact> validated;
    if (!facts.abstained) {
      validated = afv::validate_all(*afv_backend, *retriever, generation.topic, facts,
                                    config.strategy, config.top_k_passages, config.generation);
    }
    afv::append_verdict_records(verdict_records, generation.topic, validated);
    topic_reports.push_back(scoring::topic_report_from_validated(
        generation.topic, validated, facts.abstained, facts.failures.size()));
    factsets.push_back(std::move(facts));
  }

  // Aggregate; when no topic has a defined score (e.g. the backend was down),
  // emit a report that still carries the tallies.
  ScoreOutcome outcome;
  bool any_defined = std::any_of(topic_reports.begin(), topic_reports.end(),
                                 [](const scoring::TopicReport& r) {
                                   return r.factscore.has_value();
                                 });
  if (any_defined) {
    outcome.report = scoring::aggregate(topic_reports, config.subject_model);
  } else {
    outcome.report.model_name = config.subject_model;
    std::size_t responded = 0;
    for (const scoring::TopicReport& r : topic_reports) {
      outcome.report.total_failures += r.failures;
      if (!r.abstained) ++responded;
    }
    outcome.report.respond_ratio =
        topic_reports.empty()
            ? 0.0
            : static_cast<double>(responded) / static_cast<double>(topic_reports.size());
    outcome.report.topic_reports = topic_reports;
  }

  std::filesystem::create_directories(config.output_dir);
  outcome.factset_path = config.output_dir / "factset.jsonl";
  outcome.verdicts_path = config.output_dir / "verdicts.jsonl";
  outcome.report_path = config.output_dir / "report.json";
  afg::write_factsets(outcome.factset_path, factsets);
  io::write_jsonl(outcome.verdicts_path, verdict_records);
  scoring::write_run_report(outcome.report_path, outcome.report);

  nlohmann::json runlog = nlohmann::json::array();
  for (const nlohmann::json& e : run_log_json(afg_backend->run_log())) runlog.push_back(e);
  for (const nlohmann::json& e : run_log_json(afv_backend->run_log())) runlog.push_back(e);
  if (embedding_backend) {
    for (const nlohmann::json& e : run_log_json(embedding_backend->run_log())) runlog.push_back(e);
  }
  std::vector<nlohmann::json> runlog_records(runlog.begin(), runlog.end());
  io::write_jsonl(config.output_dir / "runlog.jsonl", runlog_records);

  write_manifest(config.output_dir, "score", config::to_json(config),
                 {generations_path, config.kb_store_path, config.demo_pool_path}, config.seed);

  // Exit code: 4 when every attempted topic produced nothing but failures,
  // 3 on any partial failure, 0 otherwise.
  std::size_t attempted = 0;
  std::size_t dead = 0;
  for (const scoring::TopicReport& r : outcome.report.topic_reports) {
    if (r.abstained) continue;
    ++attempted;
    if (r.num_facts == 0 && r.failures > 0) ++dead;
  }
  if (attempted > 0 && dead == attempted) {
    outcome.exit_code = kBackendUnreachable;
  } else if (dead > 0 || outcome.report.total_failures > 0) {
    outcome.exit_code = kPartialFailure;
  } else {
    outcome.exit_code = kOk;
  }
  return outcome;
}

AfgEvalOutcome cmd_eval_afg(const config::RunConfig& config,
                            const std::filesystem::path& factset_path,
                            const std::filesystem::path& annotations_path,
                            const std::string& scorer_name) {
  std::vector<afg::FactSet> factsets = afg::load_factsets(factset_path);
  std::vector<evalharness::AnnotationRecord> annotations =
      evalharness::load_annotations(annotations_path);

  std::unique_ptr<backends::Backend> embedding_backend;
  evalharness::SimilarityScorer scorer;
  if (scorer_name == "embedding-f1") {
    if (!config.embedding_backend) {
      throw ConfigError("scorer embedding-f1 requires embedding_backend in the config");
    }
    embedding_backend = config::make_backend(*config.embedding_backend, config.trace_path);
    scorer = [&backend = *embedding_backend](std::string_view a, std::string_view b) {
      return evalharness::greedy_embedding_f1(a, b, backend);
    };
  } else if (scorer_name == "token-f1") {
    scorer = [](std::string_view a, std::string_view b) { return evalharness::token_f1(a, b); };
  } else {
    throw ConfigError("unknown scorer: " + scorer_name);
  }

  AfgEvalOutcome outcome;
  outcome.scorer = scorer_name;
  double weighted_sum = 0.0;

  for (const afg::FactSet& factset : factsets) {
    auto it = std::find_if(
        annotations.begin(), annotations.end(),
        [&](const evalharness::AnnotationRecord& r) { return r.topic == factset.topic; });
    if (it == annotations.end()) {
      outcome.diagnostics.push_back("topic \"" + factset.topic + "\": no annotation record");
      continue;
    }
    evalharness::BestMatchResult result =
        evalharness::afg_best_match(factset, it->annotations, scorer);
    weighted_sum += result.mean_best * static_cast<double>(result.facts_scored);
    outcome.facts_scored += result.facts_scored;
    outcome.per_topic.emplace_back(factset.topic, result.mean_best);
    for (std::string& d : result.diagnostics) {
      outcome.diagnostics.push_back(factset.topic + ": " + std::move(d));
    }
  }
  if (outcome.facts_scored == 0) {
    throw Error("eval-afg: no generated fact could be scored against the annotations");
  }
  outcome.mean_best = weighted_sum / static_cast<double>(outcome.facts_scored);

  std::filesystem::create_directories(config.output_dir);
  nlohmann::json per_topic = nlohmann::json::object();
  for (const auto& [topic, score] : outcome.per_topic) per_topic[topic] = score;
  nlohmann::json report = {
      {"scorer", outcome.scorer},
      {"mean_best_match", outcome.mean_best},
      {"facts_scored", outcome.facts_scored},
      {"per_topic", per_topic},
      {"diagnostics", outcome.diagnostics},
  };
  io::atomic_write_file(config.output_dir / "eval_afg_report.json", report.dump(2) + "\n");
  write_manifest(config.output_dir, "eval-afg", config::to_json(config),
                 {factset_path, annotations_path}, config.seed);
  return outcome;
}

evalharness::ErCell cmd_eval_afv(const std::filesystem::path& verdicts_path,
                                 const std::filesystem::path& annotations_path,
                                 const std::string& evaluator, const std::string& subject) {
  auto verdicts_by_topic = afv::load_verdicts(verdicts_path);
  std::vector<scoring::TopicReport> reports;
  for (const auto& [topic, validated] : verdicts_by_topic) {
    reports.push_back(
        scoring::topic_report_from_validated(topic, validated, /*abstained=*/false));
  }
  scoring::RunReport run = scoring::aggregate(std::move(reports), evaluator);
  double estimated_fs = scoring::to_percent(run.factscore);

  std::vector<evalharness::AnnotationRecord> annotations =
      evalharness::load_annotations(annotations_path);
  double human_fs = evalharness::human_factscore(annotations);

  evalharness::ErCell cell;
  cell.evaluator = evaluator;
  cell.subject = subject;
  cell.human_fs = human_fs;
  cell.estimated_fs = estimated_fs;
  cell.er = evalharness::error_rate(human_fs, estimated_fs);
  return cell;
}

CorrelationReport cmd_correlate(const std::vector<std::filesystem::path>& column_files,
                                const std::filesystem::path& output_dir) {
  if (column_files.size() < 2) throw ConfigError("correlate needs at least 2 column files");

  CorrelationReport report;
  for (const std::filesystem::path& path : column_files) {
    nlohmann::json j = nlohmann::json::parse(io::read_file(path), nullptr, false);
    if (j.is_discarded() || !j.contains("label") || !j.contains("scores") ||
        !j["scores"].is_object()) {
      throw ConfigError("column file " + path.string() +
                        ": expected {\"label\": ..., \"scores\": {...}}");
    }
    evalharness::ScoreVector column;
    column.label = j["label"].get<std::string>();
    for (const auto& [name, value] : j["scores"].items()) {
      column.names.push_back(name);
      column.values.push_back(value.get<double>());
    }
    report.columns.push_back(std::move(column));
  }

  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    for (std::size_t j = i + 1; j < report.columns.size(); ++j) {
      CorrelationPair pair;
      pair.label_x = report.columns[i].label;
      pair.label_y = report.columns[j].label;
      pair.pearson = evalharness::pearson(report.columns[i], report.columns[j]);
      pair.spearman = evalharness::spearman_rank(report.columns[i], report.columns[j]);
      report.pairs.push_back(std::move(pair));
    }
  }

  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    nlohmann::json pairs = nlohmann::json::array();
    for (const CorrelationPair& p : report.pairs) {
      pairs.push_back({{"x", p.label_x},
                       {"y", p.label_y},
                       {"pearson", p.pearson},
                       {"spearman", p.spearman}});
    }
    nlohmann::json columns = nlohmann::json::array();
    for (const evalharness::ScoreVector& c : report.columns) {
      nlohmann::json scores = nlohmann::json::object();
      for (std::size_t i = 0; i < c.names.size(); ++i) scores[c.names[i]] = c.values[i];
      columns.push_back({{"label", c.label}, {"scores", scores}});
    }
    io::atomic_write_file(output_dir / "correlation_report.json",
                          nlohmann::json{{"columns", columns}, {"pairs", pairs}}.dump(2) + "\n");
    write_manifest(output_dir, "correlate", nlohmann::json::object(), column_files, 0);
  }
  return report;
}

std::string render_correlation_table(const CorrelationReport& report) {
  std::string out = "model";
  for (const evalharness::ScoreVector& c : report.columns) out += "  |  " + c.label;
  out += "\n";
  if (!report.columns.empty()) {
    for (const std::string& name : report.columns[0].names) {
      out += name;
      for (const evalharness::ScoreVector& c : report.columns) {
        double value = 0.0;
        for (std::size_t i = 0; i < c.names.size(); ++i) {
          if (c.names[i] == name) {
            value = c.values[i];
            break;
          }
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "  |  %.2f", value);
        out += buf;
      }
      out += "\n";
    }
  }
  for (const CorrelationPair& p : report.pairs) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s vs %s: pearson %.4f, spearman %.4f\n",
                  p.label_x.c_str(), p.label_y.c_str(), p.pearson, p.spearman);
    out += buf;
  }
  return out;
}

void write_er_report(const std::filesystem::path& output_dir,
                     std::span<const evalharness::ErCell> cells,
                     const std::vector<std::filesystem::path>& inputs) {
  std::filesystem::create_directories(output_dir);
  nlohmann::json rows = nlohmann::json::array();
  for (const evalharness::ErCell& c : cells) {
    rows.push_back({{"evaluator", c.evaluator},
                    {"subject", c.subject},
                    {"human_fs", c.human_fs},
                    {"estimated_fs", c.estimated_fs},
                    {"error_rate", c.er}});
  }
  nlohmann::json report = {{"cells", rows},
                           {"table", evalharness::render_er_table(cells)}};
  io::atomic_write_file(output_dir / "er_report.json", report.dump(2) + "\n");
  write_manifest(output_dir, "eval-afv", nlohmann::json::object(), inputs, 0);
}

ScoreOutcome cmd_replay(const config::RunConfig& config,
                        const std::filesystem::path& generations_path,
                        const std::filesystem::path& trace_path) {
  if (!std::filesystem::exists(trace_path)) {
    throw ConfigError("trace file does not exist: " + trace_path.string());
  }
  config::RunConfig replay_config = config;
  auto mock_from_trace = [&](config::BackendSpec& spec) {
    config::BackendSpec mock;
    mock.kind = "mock";
    mock.mock_script = trace_path;
    mock.parallelism = spec.parallelism;
    mock.mock_hash_embedding_dim = spec.mock_hash_embedding_dim;
    spec = mock;
  };
  mock_from_trace(replay_config.afg_backend);
  mock_from_trace(replay_config.afv_backend);
  if (replay_config.embedding_backend) mock_from_trace(*replay_config.embedding_backend);
  replay_config.trace_path.clear();
  return cmd_score(replay_config, generations_path);
}

}  // namespace facteval::commands
