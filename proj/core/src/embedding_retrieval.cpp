#include "facteval/embedding_retrieval.hpp"

#include <algorithm>

namespace facteval::retrieval {

EmbeddingPassageIndex::EmbeddingPassageIndex(std::vector<corpus::Passage> passages,
                                             backends::Backend& backend)
    : passages_(std::move(passages)), backend_(backend) {
  if (passages_.empty()) return;
  std::vector<std::string> texts;
  texts.reserve(passages_.size());
  for (const corpus::Passage& p : passages_) texts.push_back(p.doc_title + " " + p.text);
  vectors_ = backend_.embed(texts);
}

std::vector<corpus::Passage> EmbeddingPassageIndex::retrieve(std::string_view topic,
                                                             std::string_view fact_text,
                                                             std::size_t k) const {
  if (passages_.empty() || k == 0) return {};
  std::vector<std::string> query{std::string(topic) + " " + std::string(fact_text)};
  std::vector<double> q = backend_.embed(query)[0];

  std::vector<RankedHit> hits;
  hits.reserve(passages_.size());
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    double dot = 0.0;
    for (std::size_t d = 0; d < q.size() && d < vectors_[i].size(); ++d) {
      dot += q[d] * vectors_[i][d];
    }
    hits.push_back(RankedHit{i, dot});
  }
  std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
  if (hits.size() > k) hits.resize(k);

  std::vector<corpus::Passage> out;
  out.reserve(hits.size());
  for (const RankedHit& hit : hits) out.push_back(passages_[hit.item_id]);
  return out;
}

}  // namespace facteval::retrieval
