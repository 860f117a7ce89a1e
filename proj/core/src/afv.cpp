#include "facteval/afv.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "facteval/errors.hpp"
#include "facteval/io/jsonl.hpp"
#include "facteval/util/parallel.hpp"
#include "facteval/util/text.hpp"

namespace facteval::afv {

namespace {

constexpr std::string_view kAfvSystemPrompt =
    "You are an annotator that verifies the factuality of a sentence according to a given source "
    "text. You answer only True or False and provide no further explanations.";

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Position of the earliest standalone case-insensitive occurrence of `word`.
std::size_t find_standalone(std::string_view haystack, std::string_view word) {
  std::size_t from = 0;
  while (true) {
    std::size_t pos = text::ifind(haystack.substr(from), word);
    if (pos == std::string_view::npos) return std::string_view::npos;
    pos += from;
    bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
    std::size_t end = pos + word.size();
    bool right_ok = end >= haystack.size() || !is_word_char(haystack[end]);
    if (left_ok && right_ok) return pos;
    from = pos + 1;
  }
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::Supported ? "Supported" : "NotSupported";
}

Label label_from_name(std::string_view name) {
  std::string lowered = text::lowercase_ascii(name);
  if (lowered == "supported" || lowered == "s") return Label::Supported;
  if (lowered == "notsupported" || lowered == "not-supported" || lowered == "not supported" ||
      lowered == "ns") {
    return Label::NotSupported;
  }
  throw Error("unknown label: " + std::string(name));
}

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::parse: return "parse";
    case StrategyKind::logits: return "logits";
    case StrategyKind::ensemble: return "ensemble";
  }
  return "parse";
}

ValidationStrategy ValidationStrategy::from_name(std::string_view name) {
  ValidationStrategy s;
  if (name == "parse") {
    s.kind = StrategyKind::parse;
  } else if (name == "logits") {
    s.kind = StrategyKind::logits;
  } else if (name == "ensemble") {
    s.kind = StrategyKind::ensemble;
  } else {
    throw ConfigError("unknown validation strategy: " + std::string(name));
  }
  return s;
}

std::vector<backends::ChatMessage> build_afv_prompt(std::string_view entity,
                                                    const afg::AtomicFact& fact,
                                                    std::span<const corpus::Passage> passages) {
  std::string user = "Input: \"Answer the question about ";
  user += entity;
  user += " based on the given context.\n";
  for (const corpus::Passage& p : passages) {
    user += "[Title: " + p.doc_title + "]\n";
    user += "[Text: " + p.text + "]\n";
  }
  user += fact.text;
  user += "\nTrue or False?\nAnswer:";
  return {
      {backends::Role::system, std::string(kAfvSystemPrompt)},
      {backends::Role::user, std::move(user)},
  };
}

Verdict parse_verdict(std::string_view response) {
  Verdict v;
  v.strategy = StrategyKind::parse;
  v.raw_response = std::string(response);

  std::size_t true_pos = find_standalone(response, "true");
  std::size_t false_pos = find_standalone(response, "false");
  if (true_pos == std::string_view::npos && false_pos == std::string_view::npos) {
    v.label = Label::NotSupported;
    v.no_answer = true;
  } else {
    v.label = true_pos < false_pos ? Label::Supported : Label::NotSupported;
  }
  return v;
}

Verdict logit_verdict(backends::Backend& backend,
                      std::span<const backends::ChatMessage> messages) {
  static const std::vector<std::string> kCandidates = {"True", "False"};
  std::vector<double> scores = backend.score_candidates(messages, kCandidates);

  Verdict v;
  v.strategy = StrategyKind::logits;
  v.scores = VerdictScores{scores[0], scores[1]};
  v.label = scores[0] > scores[1] ? Label::Supported : Label::NotSupported;
  return v;
}

Verdict ensemble_verdict(const Verdict& a, const Verdict& b) {
  Verdict v;
  v.strategy = StrategyKind::ensemble;
  v.label = (a.label == Label::Supported && b.label == Label::Supported) ? Label::Supported
                                                                         : Label::NotSupported;
  v.raw_response = !a.raw_response.empty() ? a.raw_response : b.raw_response;
  v.passage_titles = !a.passage_titles.empty() ? a.passage_titles : b.passage_titles;
  v.scores = a.scores ? a.scores : b.scores;
  v.no_answer = a.no_answer || b.no_answer;
  return v;
}

namespace {

Verdict run_member(backends::Backend& backend, StrategyKind kind,
                   std::span<const backends::ChatMessage> messages,
                   const backends::GenerationParams& params) {
  if (kind == StrategyKind::logits) return logit_verdict(backend, messages);
  return parse_verdict(backend.chat(messages, params));
}

}  // namespace

Verdict validate_fact(backends::Backend& backend, const retrieval::PassageRetriever& retriever,
                      std::string_view topic, const afg::AtomicFact& fact,
                      const ValidationStrategy& strategy, std::size_t top_k,
                      const backends::GenerationParams& params) {
  std::vector<corpus::Passage> passages = retriever.retrieve(topic, fact.text, top_k);
  std::vector<backends::ChatMessage> messages = build_afv_prompt(topic, fact, passages);

  Verdict v;
  if (strategy.kind == StrategyKind::ensemble) {
    if (strategy.member_a == StrategyKind::ensemble ||
        strategy.member_b == StrategyKind::ensemble) {
      throw Error("ensemble members must be non-ensemble strategies");
    }
    Verdict a = run_member(backend, strategy.member_a, messages, params);
    Verdict b = run_member(backend, strategy.member_b, messages, params);
    v = ensemble_verdict(a, b);
  } else {
    v = run_member(backend, strategy.kind, messages, params);
  }
  v.passage_titles.clear();
  v.passage_titles.reserve(passages.size());
  for (const corpus::Passage& p : passages) v.passage_titles.push_back(p.doc_title);
  return v;
}

std::vector<ValidatedFact> validate_all(backends::Backend& backend,
                                        const retrieval::PassageRetriever& retriever,
                                        std::string_view topic, const afg::FactSet& facts,
                                        const ValidationStrategy& strategy, std::size_t top_k,
                                        const backends::GenerationParams& params) {
  std::vector<afg::AtomicFact> flattened = facts.flatten();
  std::vector<ValidatedFact> out(flattened.size());

  parallel::for_each_index(
      flattened.size(), static_cast<std::size_t>(backend.parallelism()), [&](std::size_t i) {
        const afg::AtomicFact& fact = flattened[i];
        out[i].sentence_index = fact.sentence_index;
        out[i].fact_index = fact.fact_index;
        out[i].fact_text = fact.text;
        try {
          out[i].verdict = validate_fact(backend, retriever, topic, fact, strategy, top_k, params);
        } catch (const std::exception& e) {
          out[i].error = e.what();
        }
      });
  return out;
}

void append_verdict_records(std::vector<nlohmann::json>& records, std::string_view topic,
                            std::span<const ValidatedFact> facts) {
  for (const ValidatedFact& vf : facts) {
    nlohmann::json record = {
        {"topic", std::string(topic)},
        {"sentence_index", vf.sentence_index},
        {"fact_index", vf.fact_index},
        {"fact", vf.fact_text},
    };
    if (vf.verdict) {
      record["label"] = std::string(label_name(vf.verdict->label));
      record["strategy"] = std::string(strategy_name(vf.verdict->strategy));
      record["passage_titles"] = vf.verdict->passage_titles;
      record["raw_response"] = vf.verdict->raw_response;
      if (vf.verdict->no_answer) record["no_answer"] = true;
      if (vf.verdict->scores) {
        record["scores"] = {{"logprob_true", vf.verdict->scores->logprob_true},
                            {"logprob_false", vf.verdict->scores->logprob_false}};
      }
    } else {
      record["error"] = vf.error;
    }
    records.push_back(std::move(record));
  }
}

void write_verdicts(const std::filesystem::path& path, std::string_view topic,
                    std::span<const ValidatedFact> facts) {
  std::vector<nlohmann::json> records;
  append_verdict_records(records, topic, facts);
  io::write_jsonl(path, records);
}

std::vector<std::pair<std::string, std::vector<ValidatedFact>>> load_verdicts(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::vector<ValidatedFact>>> out;
  std::map<std::string, std::size_t> by_topic;

  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (!record.contains("topic") || !record.contains("fact")) {
      throw ConfigError("verdict file " + path.string() + " line " + std::to_string(line) +
                        ": need topic and fact");
    }
    std::string topic = record["topic"].get<std::string>();
    auto [it, inserted] = by_topic.emplace(topic, out.size());
    if (inserted) out.emplace_back(topic, std::vector<ValidatedFact>{});

    ValidatedFact vf;
    vf.sentence_index = record.value("sentence_index", 0ULL);
    vf.fact_index = record.value("fact_index", 0ULL);
    vf.fact_text = record["fact"].get<std::string>();
    if (record.contains("label")) {
      Verdict v;
      v.label = label_from_name(record["label"].get<std::string>());
      if (record.contains("strategy")) {
        std::string s = record["strategy"].get<std::string>();
        v.strategy = s == "logits"     ? StrategyKind::logits
                     : s == "ensemble" ? StrategyKind::ensemble
                                       : StrategyKind::parse;
      }
      if (record.contains("passage_titles")) {
        v.passage_titles = record["passage_titles"].get<std::vector<std::string>>();
      }
      v.raw_response = record.value("raw_response", std::string());
      v.no_answer = record.value("no_answer", false);
      if (record.contains("scores")) {
        v.scores = VerdictScores{record["scores"].value("logprob_true", 0.0),
                                 record["scores"].value("logprob_false", 0.0)};
      }
      vf.verdict = std::move(v);
    } else {
      vf.error = record.value("error", std::string("unknown failure"));
    }
    out[it->second].second.push_back(std::move(vf));
  });
  if (out.empty()) throw ConfigError("verdict file " + path.string() + " is empty");
  return out;
}

}  // namespace facteval::afv
