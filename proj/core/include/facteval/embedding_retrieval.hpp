#pragma once

#include "facteval/backends.hpp"
#include "facteval/retrieval.hpp"

namespace facteval::retrieval {

/// Opt-in alternate retrieval mode: passages and queries are embedded through
/// a backend and ranked by cosine similarity (vectors arrive L2-normalized,
/// so this is a dot product). Ties break by ascending passage position, like
/// BM25.
class EmbeddingPassageIndex final : public PassageRetriever {
 public:
  /// Embeds every passage up front (one backend batch).
  EmbeddingPassageIndex(std::vector<corpus::Passage> passages, backends::Backend& backend);

  std::vector<corpus::Passage> retrieve(std::string_view topic, std::string_view fact_text,
                                        std::size_t k) const override;

  const std::vector<corpus::Passage>& passages() const { return passages_; }

 private:
  std::vector<corpus::Passage> passages_;
  std::vector<std::vector<double>> vectors_;
  backends::Backend& backend_;
};

}  // namespace facteval::retrieval
