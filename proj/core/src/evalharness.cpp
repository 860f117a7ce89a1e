#include "facteval/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "facteval/errors.hpp"
#include "facteval/io/jsonl.hpp"
#include "facteval/retrieval.hpp"
#include "facteval/util/text.hpp"

namespace facteval::evalharness {

namespace {

std::optional<afv::Label> parse_label(const nlohmann::json& value) {
  if (!value.is_string()) return std::nullopt;
  std::string lowered = text::lowercase_ascii(value.get<std::string>());
  if (lowered == "supported" || lowered == "s") return afv::Label::Supported;
  if (lowered == "not-supported" || lowered == "notsupported" || lowered == "not supported" ||
      lowered == "ns") {
    return afv::Label::NotSupported;
  }
  return std::nullopt;  // e.g. "IR": present but unlabeled for scoring
}

}  // namespace

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path,
                                               AnnotationLoadStats* stats) {
  AnnotationLoadStats local;
  std::vector<AnnotationRecord> records;

  io::for_each_jsonl(
      path,
      [&](std::size_t, const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("topic") || !j["topic"].is_string()) {
          ++local.skipped_malformed;
          return;
        }
        if (!j.contains("annotations") || j["annotations"].is_null()) {
          ++local.skipped_null_annotations;
          return;
        }
        if (!j["annotations"].is_array()) {
          ++local.skipped_malformed;
          return;
        }
        AnnotationRecord record;
        record.topic = j["topic"].get<std::string>();
        record.input = j.value("input", std::string());
        record.output = j.value("output", std::string());
        for (const nlohmann::json& a : j["annotations"]) {
          if (!a.is_object()) continue;
          SentenceAnnotation sentence;
          sentence.text = a.value("text", std::string());
          if (a.contains("is-relevant") && a["is-relevant"].is_boolean()) {
            sentence.is_relevant = a["is-relevant"].get<bool>();
          } else if (a.contains("is_relevant") && a["is_relevant"].is_boolean()) {
            sentence.is_relevant = a["is_relevant"].get<bool>();
          }
          const char* facts_key = a.contains("human-atomic-facts") ? "human-atomic-facts"
                                  : a.contains("human_atomic_facts") ? "human_atomic_facts"
                                                                     : nullptr;
          if (facts_key && a[facts_key].is_array()) {
            for (const nlohmann::json& f : a[facts_key]) {
              if (!f.is_object() || !f.contains("text")) continue;
              HumanFact fact;
              fact.text = f["text"].get<std::string>();
              if (f.contains("label")) fact.label = parse_label(f["label"]);
              sentence.human_facts.push_back(std::move(fact));
            }
          }
          record.annotations.push_back(std::move(sentence));
        }
        records.push_back(std::move(record));
      },
      [&](std::size_t, const std::string&) { ++local.skipped_malformed; });

  local.records = records.size();
  if (stats) *stats = local;
  if (records.empty()) throw Error("no valid annotation records in " + path.string());
  return records;
}

double human_factscore(std::span<const AnnotationRecord> records) {
  double sum = 0.0;
  std::size_t topics = 0;
  for (const AnnotationRecord& record : records) {
    std::size_t supported = 0;
    std::size_t labeled = 0;
    for (const SentenceAnnotation& sentence : record.annotations) {
      if (!sentence.is_relevant) continue;
      for (const HumanFact& fact : sentence.human_facts) {
        if (!fact.label) continue;
        ++labeled;
        if (*fact.label == afv::Label::Supported) ++supported;
      }
    }
    if (labeled == 0) continue;
    sum += static_cast<double>(supported) / static_cast<double>(labeled);
    ++topics;
  }
  if (topics == 0) throw Error("human_factscore: no topic has labeled facts");
  return 100.0 * sum / static_cast<double>(topics);
}

double error_rate(double fs_human, double fs_estimated) { return fs_human - fs_estimated; }

double cumulative_error_rate(std::span<const double> error_rates) {
  if (error_rates.empty()) throw Error("cumulative_error_rate: empty input");
  double total = 0.0;
  for (double er : error_rates) total += std::fabs(er);
  return total;
}

double token_f1(std::string_view a, std::string_view b) {
  std::vector<std::string> ta = retrieval::tokenize(a);
  std::vector<std::string> tb = retrieval::tokenize(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;

  std::map<std::string, std::size_t> counts;
  for (const std::string& t : ta) ++counts[t];
  std::size_t overlap = 0;
  for (const std::string& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(ta.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(tb.size());
  return 2.0 * precision * recall / (precision + recall);
}

double greedy_embedding_f1(std::string_view candidate, std::string_view reference,
                           backends::Backend& backend) {
  std::vector<std::string> cand_tokens = text::split_words(candidate);
  std::vector<std::string> ref_tokens = text::split_words(reference);
  if (cand_tokens.empty() && ref_tokens.empty()) return 1.0;
  if (cand_tokens.empty() || ref_tokens.empty()) return 0.0;

  std::vector<std::string> all = cand_tokens;
  all.insert(all.end(), ref_tokens.begin(), ref_tokens.end());
  std::vector<std::vector<double>> vectors = backend.embed(all);
  auto cand_vec = std::span(vectors).first(cand_tokens.size());
  auto ref_vec = std::span(vectors).subspan(cand_tokens.size());

  auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) s += x[i] * y[i];
    return s;
  };
  auto mean_best = [&](std::span<const std::vector<double>> from,
                       std::span<const std::vector<double>> to) {
    double sum = 0.0;
    for (const std::vector<double>& f : from) {
      double best = -1.0;
      for (const std::vector<double>& t : to) best = std::max(best, dot(f, t));
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };

  double precision = mean_best(cand_vec, ref_vec);
  double recall = mean_best(ref_vec, cand_vec);
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

BestMatchResult afg_best_match(const afg::FactSet& generated,
                               std::span<const SentenceAnnotation> annotated,
                               const SimilarityScorer& scorer, const BestMatchOptions& options) {
  BestMatchResult result;

  bool align_by_index = generated.sentences.size() == annotated.size();
  auto find_annotation = [&](const afg::SentenceFacts& sf) -> const SentenceAnnotation* {
    if (align_by_index && sf.sentence.index < annotated.size()) {
      return &annotated[sf.sentence.index];
    }
    for (const SentenceAnnotation& a : annotated) {
      if (a.text == sf.sentence.text) return &a;
    }
    return nullptr;
  };

  double sum = 0.0;
  std::size_t scored = 0;
  double sentence_sum = 0.0;
  std::size_t sentences_scored = 0;

  for (const afg::SentenceFacts& sf : generated.sentences) {
    const SentenceAnnotation* annotation = find_annotation(sf);
    if (annotation == nullptr || annotation->human_facts.empty()) {
      result.diagnostics.push_back("sentence " + std::to_string(sf.sentence.index) +
                                   ": no aligned annotation with human facts");
      continue;
    }
    ++result.sentences_aligned;

    double sentence_best = 0.0;
    for (const afg::AtomicFact& fact : sf.facts) {
      double best = 0.0;
      for (const HumanFact& human : annotation->human_facts) {
        best = std::max(best, scorer(fact.text, human.text));
      }
      sum += best;
      ++scored;
      sentence_best = std::max(sentence_best, best);
    }
    if (!sf.facts.empty()) {
      sentence_sum += sentence_best;
      ++sentences_scored;
    }
  }

  if (result.sentences_aligned == 0) {
    throw Error("afg_best_match: no generated sentence aligns with the annotations");
  }
  if (options.per_sentence_max) {
    result.mean_best = sentences_scored == 0 ? 0.0 : sentence_sum / sentences_scored;
    result.facts_scored = sentences_scored;
  } else {
    result.mean_best = scored == 0 ? 0.0 : sum / static_cast<double>(scored);
    result.facts_scored = scored;
  }
  return result;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  std::size_t n = x.size();
  if (n < 2) throw Error("pearson: need at least 2 points");

  double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mean_x;
    double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> align(const ScoreVector& x, const ScoreVector& y) {
  if (x.names.size() != x.values.size() || y.names.size() != y.values.size()) {
    throw Error("score vector: names/values length mismatch");
  }
  std::map<std::string, double> lookup;
  for (std::size_t i = 0; i < y.names.size(); ++i) lookup[y.names[i]] = y.values[i];
  std::vector<double> aligned;
  aligned.reserve(x.names.size());
  for (const std::string& name : x.names) {
    auto it = lookup.find(name);
    if (it == lookup.end()) throw Error("score vector: no value for \"" + name + "\"");
    aligned.push_back(it->second);
  }
  if (lookup.size() != x.names.size()) throw Error("score vector: label sets differ");
  return aligned;
}

}  // namespace

double pearson(const ScoreVector& x, const ScoreVector& y) {
  return pearson(std::span<const double>(x.values), std::span<const double>(align(x, y)));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman_rank(std::span<const double> x, std::span<const double> y) {
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double spearman_rank(const ScoreVector& x, const ScoreVector& y) {
  std::vector<double> aligned = align(x, y);
  return spearman_rank(std::span<const double>(x.values), std::span<const double>(aligned));
}

std::string render_er_table(std::span<const ErCell> cells) {
  std::vector<std::string> evaluators;
  std::vector<std::string> subjects;
  for (const ErCell& c : cells) {
    if (std::find(evaluators.begin(), evaluators.end(), c.evaluator) == evaluators.end()) {
      evaluators.push_back(c.evaluator);
    }
    if (std::find(subjects.begin(), subjects.end(), c.subject) == subjects.end()) {
      subjects.push_back(c.subject);
    }
  }

  std::string out = "evaluator";
  for (const std::string& s : subjects) out += "  |  " + s + " (ER / FS)";
  out += "  |  cumulative |ER|\n";

  for (const std::string& evaluator : evaluators) {
    out += evaluator;
    double cumulative = 0.0;
    for (const std::string& subject : subjects) {
      auto it = std::find_if(cells.begin(), cells.end(), [&](const ErCell& c) {
        return c.evaluator == evaluator && c.subject == subject;
      });
      if (it == cells.end()) {
        out += "  |  -";
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "  |  %.1f / %.1f", it->er, it->estimated_fs);
      out += buf;
      cumulative += std::fabs(it->er);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  |  %.1f\n", cumulative);
    out += buf;
  }
  return out;
}

}  // namespace facteval::evalharness
