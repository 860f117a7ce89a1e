#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "facteval/corpus.hpp"

namespace facteval::retrieval {

/// Lowercase, split on non-alphanumeric bytes, drop empties. No stemming, no
/// stopwords. Multi-byte UTF-8 sequences act as separators.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

struct Posting {
  std::uint64_t item_id;
  std::uint32_t term_frequency;
};

struct RankedHit {
  std::uint64_t item_id;
  double score;
};

/// Okapi BM25 over an in-memory inverted index.
///
///   score(q, d) = sum over q of IDF(t) * tf*(k1+1) / (tf + k1*(1 - b + b*len/avglen))
///   IDF(t)      = ln((N - n_t + 0.5) / (n_t + 0.5) + 1)
///
/// The +1 inside the log keeps every matching term's contribution positive.
/// Query terms are consumed as given: a term repeated in the query
/// contributes once per occurrence. Immutable after build; concurrent
/// queries are safe.
class InvertedIndex {
 public:
  /// item_ids must be unique; throws Error on duplicates.
  static InvertedIndex build(std::span<const std::pair<std::uint64_t, std::string>> items,
                             Bm25Params params = {});
  /// Convenience: ids are positions 0..n-1.
  static InvertedIndex build(std::span<const std::string> texts, Bm25Params params = {});

  /// BM25 score of one item for the query terms. Throws Error on unknown id.
  double score(std::span<const std::string> query_terms, std::uint64_t item_id) const;

  /// The k best items, score descending, ties by ascending item_id.
  /// Items sharing no term with the query (score 0) are excluded.
  std::vector<RankedHit> top_k(std::string_view query, std::size_t k) const;
  std::vector<RankedHit> top_k_terms(std::span<const std::string> query_terms,
                                     std::size_t k) const;

  std::size_t item_count() const { return doc_lengths_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const Bm25Params& params() const { return params_; }
  const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }

  /// Optional cache file, magic "FEIX1\n", same binary conventions as the
  /// corpus store.
  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

 private:
  double idf(const std::string& term) const;

  std::map<std::string, std::vector<Posting>> postings_;  // sorted; postings by ascending id
  std::unordered_map<std::uint64_t, std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  Bm25Params params_;
};

inline constexpr std::string_view kIndexMagic = "FEIX1\n";

/// Ranked passage lookup, shared by BM25 and embedding modes.
class PassageRetriever {
 public:
  virtual ~PassageRetriever() = default;
  /// Query is topic ++ " " ++ fact text; returns up to k passages in rank order.
  virtual std::vector<corpus::Passage> retrieve(std::string_view topic,
                                                std::string_view fact_text,
                                                std::size_t k) const = 0;
};

/// BM25 index over a passage collection. Each passage is indexed as
/// "doc_title <space> text" so title terms participate in matching.
class PassageIndex final : public PassageRetriever {
 public:
  explicit PassageIndex(std::vector<corpus::Passage> passages, Bm25Params params = {});

  std::vector<corpus::Passage> retrieve(std::string_view topic, std::string_view fact_text,
                                        std::size_t k) const override;

  const InvertedIndex& index() const { return index_; }
  const std::vector<corpus::Passage>& passages() const { return passages_; }

 private:
  std::vector<corpus::Passage> passages_;
  InvertedIndex index_;
};

/// Index of the top-1 item for the query sentence, or 0 when every item
/// scores 0 (callers treat the first entry as the fallback). Throws Error on
/// an empty pool.
std::size_t select_best_index(std::span<const std::string> pool_texts,
                              std::string_view sentence,
                              Bm25Params params = {});

}  // namespace facteval::retrieval
