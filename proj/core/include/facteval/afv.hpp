#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "facteval/afg.hpp"
#include "facteval/backends.hpp"
#include "facteval/retrieval.hpp"

namespace facteval::afv {

enum class Label { Supported, NotSupported };

std::string_view label_name(Label label);
Label label_from_name(std::string_view name);

enum class StrategyKind { parse, logits, ensemble };

std::string_view strategy_name(StrategyKind kind);

/// parse | logits | ensemble(member_a, member_b); ensemble members are
/// non-ensemble. The paper's non-parametric scorer is a plug-in slot: any
/// verdict source can feed ensemble_verdict.
struct ValidationStrategy {
  StrategyKind kind = StrategyKind::parse;
  StrategyKind member_a = StrategyKind::parse;
  StrategyKind member_b = StrategyKind::logits;

  static ValidationStrategy from_name(std::string_view name);  // "parse"|"logits"|"ensemble"
};

struct VerdictScores {
  double logprob_true = 0.0;
  double logprob_false = 0.0;
};

struct Verdict {
  Label label = Label::NotSupported;
  StrategyKind strategy = StrategyKind::parse;
  std::string raw_response;  // empty for logits
  std::vector<std::string> passage_titles;
  std::optional<VerdictScores> scores;  // present for logits
  bool no_answer = false;  // parse found neither True nor False
};

/// System message: the verification instruction. User message: the entity
/// line, one [Title: ...] and [Text: ...] line per passage in rank order, the
/// fact text, then "True or False?" / "Answer:". Zero passages is allowed.
std::vector<backends::ChatMessage> build_afv_prompt(std::string_view entity,
                                                    const afg::AtomicFact& fact,
                                                    std::span<const corpus::Passage> passages);

/// Earliest standalone (word-boundary, case-insensitive) "true" or "false"
/// wins; Supported iff it is "true". Neither present -> NotSupported with
/// no_answer set. Total over arbitrary bytes.
Verdict parse_verdict(std::string_view response);

/// Supported iff logP("True") > logP("False") as continuations of the
/// prompt; an exact tie is NotSupported. Scores recorded on the verdict.
Verdict logit_verdict(backends::Backend& backend,
                      std::span<const backends::ChatMessage> messages);

/// Supported only when both members are Supported.
Verdict ensemble_verdict(const Verdict& a, const Verdict& b);

/// retrieve -> prompt -> strategy. The verdict carries the retrieved passage
/// titles for audit.
Verdict validate_fact(backends::Backend& backend, const retrieval::PassageRetriever& retriever,
                      std::string_view topic, const afg::AtomicFact& fact,
                      const ValidationStrategy& strategy, std::size_t top_k = 5,
                      const backends::GenerationParams& params = {});

struct ValidatedFact {
  std::size_t sentence_index = 0;
  std::size_t fact_index = 0;
  std::string fact_text;
  std::optional<Verdict> verdict;  // absent on failure
  std::string error;

  bool failed() const { return !verdict.has_value(); }
};

/// Order-preserving batch over the flattened FactSet; per-fact failures are
/// recorded and the batch continues. Concurrency is bounded by the backend.
std::vector<ValidatedFact> validate_all(backends::Backend& backend,
                                        const retrieval::PassageRetriever& retriever,
                                        std::string_view topic, const afg::FactSet& facts,
                                        const ValidationStrategy& strategy, std::size_t top_k = 5,
                                        const backends::GenerationParams& params = {});

/// Verdict files: {topic, sentence_index, fact_index, fact, label, strategy,
/// passage_titles, raw_response, scores} per line; failed facts carry an
/// error field instead of a label.
void write_verdicts(const std::filesystem::path& path, std::string_view topic,
                    std::span<const ValidatedFact> facts);
void append_verdict_records(std::vector<nlohmann::json>& records, std::string_view topic,
                            std::span<const ValidatedFact> facts);
std::vector<std::pair<std::string, std::vector<ValidatedFact>>> load_verdicts(
    const std::filesystem::path& path);

}  // namespace facteval::afv
