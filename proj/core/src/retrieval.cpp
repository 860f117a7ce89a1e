#include "facteval/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

#include "facteval/errors.hpp"
#include "facteval/io/binary.hpp"

namespace facteval::retrieval {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

InvertedIndex InvertedIndex::build(std::span<const std::pair<std::uint64_t, std::string>> items,
                                   Bm25Params params) {
  InvertedIndex index;
  index.params_ = params;
  std::uint64_t total_length = 0;
  for (const auto& [item_id, item_text] : items) {
    if (!index.doc_lengths_.emplace(item_id, 0).second) {
      throw Error("duplicate item_id " + std::to_string(item_id));
    }
    std::vector<std::string> terms = tokenize(item_text);
    index.doc_lengths_[item_id] = static_cast<std::uint32_t>(terms.size());
    total_length += terms.size();

    std::map<std::string, std::uint32_t> counts;
    for (std::string& t : terms) ++counts[std::move(t)];
    for (auto& [term, tf] : counts) {
      index.postings_[term].push_back(Posting{item_id, tf});
    }
  }
  for (auto& [term, plist] : index.postings_) {
    std::sort(plist.begin(), plist.end(),
              [](const Posting& a, const Posting& b) { return a.item_id < b.item_id; });
  }
  index.avg_doc_length_ =
      items.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(items.size());
  return index;
}

InvertedIndex InvertedIndex::build(std::span<const std::string> texts, Bm25Params params) {
  std::vector<std::pair<std::uint64_t, std::string>> items;
  items.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) items.emplace_back(i, texts[i]);
  return build(items, params);
}

double InvertedIndex::idf(const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return 0.0;
  double n_t = static_cast<double>(it->second.size());
  double n = static_cast<double>(doc_lengths_.size());
  return std::log((n - n_t + 0.5) / (n_t + 0.5) + 1.0);
}

double InvertedIndex::score(std::span<const std::string> query_terms,
                            std::uint64_t item_id) const {
  auto len_it = doc_lengths_.find(item_id);
  if (len_it == doc_lengths_.end()) {
    throw Error("unknown item_id " + std::to_string(item_id));
  }
  double len = static_cast<double>(len_it->second);
  double norm = params_.k1 * (1.0 - params_.b + params_.b * len / avg_doc_length_);

  double total = 0.0;
  for (const std::string& term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const std::vector<Posting>& plist = it->second;
    auto pit = std::lower_bound(plist.begin(), plist.end(), item_id,
                                [](const Posting& p, std::uint64_t id) { return p.item_id < id; });
    if (pit == plist.end() || pit->item_id != item_id) continue;
    double tf = static_cast<double>(pit->term_frequency);
    total += idf(term) * tf * (params_.k1 + 1.0) / (tf + norm);
  }
  return total;
}

std::vector<RankedHit> InvertedIndex::top_k_terms(std::span<const std::string> query_terms,
                                                  std::size_t k) const {
  std::unordered_map<std::uint64_t, double> scores;
  for (const std::string& term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    double term_idf = idf(term);
    for (const Posting& p : it->second) {
      double len = static_cast<double>(doc_lengths_.at(p.item_id));
      double norm = params_.k1 * (1.0 - params_.b + params_.b * len / avg_doc_length_);
      double tf = static_cast<double>(p.term_frequency);
      scores[p.item_id] += term_idf * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }

  std::vector<RankedHit> hits;
  hits.reserve(scores.size());
  for (const auto& [item_id, score] : scores) {
    if (score > 0.0) hits.push_back(RankedHit{item_id, score});
  }
  std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<RankedHit> InvertedIndex::top_k(std::string_view query, std::size_t k) const {
  return top_k_terms(tokenize(query), k);
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  io::BinaryWriter out;
  out.raw(kIndexMagic);
  out.u64(std::bit_cast<std::uint64_t>(params_.k1));
  out.u64(std::bit_cast<std::uint64_t>(params_.b));
  out.u64(doc_lengths_.size());
  std::vector<std::pair<std::uint64_t, std::uint32_t>> lengths(doc_lengths_.begin(),
                                                               doc_lengths_.end());
  std::sort(lengths.begin(), lengths.end());
  for (const auto& [id, len] : lengths) {
    out.u64(id);
    out.u64(len);
  }
  out.u64(postings_.size());
  for (const auto& [term, plist] : postings_) {
    out.str(term);
    out.u64(plist.size());
    for (const Posting& p : plist) {
      out.u64(p.item_id);
      out.u64(p.term_frequency);
    }
  }
  io::atomic_write_file(path, out.buffer());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::string bytes = io::read_file(path);
  if (bytes.size() < kIndexMagic.size() ||
      std::string_view(bytes).substr(0, kIndexMagic.size()) != kIndexMagic) {
    throw StoreError("bad magic in " + path.string());
  }
  io::BinaryReader reader(bytes);
  reader.seek(kIndexMagic.size());

  InvertedIndex index;
  index.params_.k1 = std::bit_cast<double>(reader.u64());
  index.params_.b = std::bit_cast<double>(reader.u64());
  std::uint64_t doc_count = reader.u64();
  std::uint64_t total_length = 0;
  for (std::uint64_t i = 0; i < doc_count; ++i) {
    std::uint64_t id = reader.u64();
    std::uint64_t len = reader.u64();
    index.doc_lengths_[id] = static_cast<std::uint32_t>(len);
    total_length += len;
  }
  index.avg_doc_length_ =
      doc_count == 0 ? 0.0 : static_cast<double>(total_length) / static_cast<double>(doc_count);
  std::uint64_t term_count = reader.u64();
  for (std::uint64_t t = 0; t < term_count; ++t) {
    std::string term = reader.str();
    std::uint64_t posting_count = reader.u64();
    std::vector<Posting> plist;
    plist.reserve(posting_count);
    for (std::uint64_t p = 0; p < posting_count; ++p) {
      std::uint64_t id = reader.u64();
      std::uint64_t tf = reader.u64();
      plist.push_back(Posting{id, static_cast<std::uint32_t>(tf)});
    }
    index.postings_[std::move(term)] = std::move(plist);
  }
  return index;
}

PassageIndex::PassageIndex(std::vector<corpus::Passage> passages, Bm25Params params)
    : passages_(std::move(passages)) {
  std::vector<std::string> texts;
  texts.reserve(passages_.size());
  for (const corpus::Passage& p : passages_) texts.push_back(p.doc_title + " " + p.text);
  index_ = InvertedIndex::build(texts, params);
}

std::vector<corpus::Passage> PassageIndex::retrieve(std::string_view topic,
                                                    std::string_view fact_text,
                                                    std::size_t k) const {
  std::string query = std::string(topic) + " " + std::string(fact_text);
  std::vector<corpus::Passage> out;
  for (const RankedHit& hit : index_.top_k(query, k)) {
    out.push_back(passages_[hit.item_id]);
  }
  return out;
}

std::size_t select_best_index(std::span<const std::string> pool_texts,
                              std::string_view sentence,
                              Bm25Params params) {
  if (pool_texts.empty()) throw Error("select_best_index: empty pool");
  InvertedIndex index = InvertedIndex::build(pool_texts, params);
  std::vector<RankedHit> hits = index.top_k(sentence, 1);
  return hits.empty() ? 0 : static_cast<std::size_t>(hits[0].item_id);
}

}  // namespace facteval::retrieval
