#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facteval/afg.hpp"
#include "facteval/afv.hpp"
#include "facteval/backends.hpp"

namespace facteval::evalharness {

struct HumanFact {
  std::string text;
  std::optional<afv::Label> label;  // absent when unlabeled (e.g. irrelevant)
};

struct SentenceAnnotation {
  std::string text;
  bool is_relevant = true;  // false -> skipped without validation
  std::vector<HumanFact> human_facts;
};

struct AnnotationRecord {
  std::string input;
  std::string output;
  std::string topic;
  std::vector<SentenceAnnotation> annotations;
};

struct AnnotationLoadStats {
  std::size_t records = 0;
  std::size_t skipped_null_annotations = 0;
  std::size_t skipped_malformed = 0;
};

/// Line-delimited records with fields input/output/topic/annotations
/// (annotations: text, is-relevant, human-atomic-facts -> text, label).
/// Labels match case-insensitively; unknown fields are ignored; records with
/// null annotations and malformed lines are skipped with a tally. Throws
/// Error when nothing valid remains.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path,
                                               AnnotationLoadStats* stats = nullptr);

/// Macro mean over topics of Supported/(Supported+NotSupported), counting
/// only labeled facts inside is-relevant sentences. Returned on the 0-100
/// percent scale. Topics with zero labeled facts are excluded.
double human_factscore(std::span<const AnnotationRecord> records);

/// Human FS minus estimated FS (both on the percent scale).
double error_rate(double fs_human, double fs_estimated);

/// Sum of absolute error rates.
double cumulative_error_rate(std::span<const double> error_rates);

/// Harmonic mean of precision/recall over multiset token overlap (BM25
/// tokenizer). Both empty -> 1, exactly one empty -> 0. Symmetric.
double token_f1(std::string_view a, std::string_view b);

/// Greedy token-matching F1 over backend embeddings of whitespace tokens:
/// precision = mean over candidate tokens of the max cosine similarity to any
/// reference token; recall symmetric. No idf weighting.
double greedy_embedding_f1(std::string_view candidate, std::string_view reference,
                           backends::Backend& backend);

using SimilarityScorer = std::function<double(std::string_view, std::string_view)>;

struct BestMatchOptions {
  /// Default scores each generated fact by its best human match. The
  /// alternative reading collapses each sentence to its single best pair.
  bool per_sentence_max = false;
};

struct BestMatchResult {
  double mean_best = 0.0;
  std::size_t facts_scored = 0;
  std::size_t sentences_aligned = 0;
  std::vector<std::string> diagnostics;
};

/// Aligns generated sentences to annotations by index (exact sentence text
/// when counts differ; unalignable sentences are skipped with a diagnostic),
/// scores each generated fact by its best-matching human fact, and returns
/// the mean. Throws Error when no sentence aligns.
BestMatchResult afg_best_match(const afg::FactSet& generated,
                               std::span<const SentenceAnnotation> annotated,
                               const SimilarityScorer& scorer,
                               const BestMatchOptions& options = {});

struct ScoreVector {
  std::string label;
  std::vector<std::string> names;
  std::vector<double> values;
};

/// Sample Pearson correlation. Vectors are aligned by name; throws Error on
/// mismatched name sets, n < 2, or zero variance.
double pearson(const ScoreVector& x, const ScoreVector& y);
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson over average ranks (ties share the mean rank).
double spearman_rank(const ScoreVector& x, const ScoreVector& y);
double spearman_rank(std::span<const double> x, std::span<const double> y);

std::vector<double> average_ranks(std::span<const double> values);

struct ErCell {
  std::string evaluator;
  std::string subject;
  double human_fs = 0.0;
  double estimated_fs = 0.0;
  double er = 0.0;
};

/// Grid of ER per (evaluator, subject) with a cumulative |ER| column.
std::string render_er_table(std::span<const ErCell> cells);

}  // namespace facteval::evalharness
