#include "facteval/corpus.hpp"

#include <algorithm>
#include <map>

#include "facteval/errors.hpp"
#include "facteval/io/binary.hpp"
#include "facteval/io/jsonl.hpp"
#include "facteval/util/text.hpp"

namespace facteval::corpus {

std::vector<Passage> chunk_document(const Document& doc, std::size_t chunk_size) {
  if (chunk_size < kMinChunkSize) {
    throw ConfigError("chunk_size must be >= " + std::to_string(kMinChunkSize));
  }
  std::vector<Passage> out;
  std::string normalized = text::normalize_whitespace(doc.text);
  if (normalized.empty()) return out;

  std::vector<std::string> sentences = text::split_sentence_strings(normalized);

  std::string current;
  std::size_t current_words = 0;
  auto flush = [&](bool oversized) {
    if (current.empty()) return;
    out.push_back(Passage{doc.title, out.size(), current, current_words, oversized});
    current.clear();
    current_words = 0;
  };

  for (const std::string& sentence : sentences) {
    std::size_t words = text::count_words(sentence);
    if (words > chunk_size) {
      flush(false);
      current = sentence;
      current_words = words;
      flush(true);
      continue;
    }
    if (current_words + words > chunk_size) flush(false);
    if (!current.empty()) current.push_back(' ');
    current += sentence;
    current_words += words;
  }
  flush(false);
  return out;
}

std::size_t write_store(const std::filesystem::path& path,
                        const std::vector<Document>& documents,
                        std::size_t chunk_size) {
  // Sorted by title: ingestion order never leaks into the bytes.
  std::map<std::string_view, const Document*> by_title;
  for (const Document& d : documents) by_title[d.title] = &d;

  struct DocBlobs {
    std::string_view title;
    std::vector<std::size_t> relative_offsets;
  };
  std::size_t total_passages = 0;
  std::vector<DocBlobs> table;
  io::BinaryWriter blobs;
  for (const auto& [title, doc] : by_title) {
    DocBlobs entry{title, {}};
    for (const Passage& p : chunk_document(*doc, chunk_size)) {
      entry.relative_offsets.push_back(blobs.size());
      blobs.str(p.text);
      blobs.u64(p.word_count);
      blobs.u64(p.oversized ? 1 : 0);
      ++total_passages;
    }
    table.push_back(std::move(entry));
  }

  std::size_t table_bytes = 0;
  for (const DocBlobs& e : table) {
    table_bytes += 8 + e.title.size() + 8 + 8 * e.relative_offsets.size();
  }
  std::size_t blob_base = kStoreMagic.size() + 8 + table_bytes;

  io::BinaryWriter out;
  out.raw(kStoreMagic);
  out.u64(table.size());
  for (const DocBlobs& e : table) {
    out.str(e.title);
    out.u64(e.relative_offsets.size());
    for (std::size_t rel : e.relative_offsets) out.u64(blob_base + rel);
  }
  out.raw(blobs.buffer());
  io::atomic_write_file(path, out.buffer());
  return total_passages;
}

IngestStats ingest_dump(const std::filesystem::path& dump_path,
                        const std::filesystem::path& store_path,
                        std::size_t chunk_size) {
  IngestStats stats;
  std::vector<Document> documents;
  std::unordered_map<std::string, std::size_t> seen;

  io::for_each_jsonl(
      dump_path,
      [&](std::size_t, const nlohmann::json& record) {
        if (!record.is_object() || !record.contains("title") || !record.contains("text") ||
            !record["title"].is_string() || !record["text"].is_string() ||
            record["title"].get_ref<const std::string&>().empty()) {
          ++stats.skipped;
          return;
        }
        Document doc{record["title"].get<std::string>(), record["text"].get<std::string>()};
        auto [it, inserted] = seen.emplace(doc.title, documents.size());
        if (inserted) {
          documents.push_back(std::move(doc));
        } else {
          documents[it->second] = std::move(doc);  // last record wins
          ++stats.duplicates;
        }
      },
      [&](std::size_t, const std::string&) { ++stats.skipped; });

  stats.passages = write_store(store_path, documents, chunk_size);
  stats.documents = documents.size();
  return stats;
}

PassageStore PassageStore::open(const std::filesystem::path& path) {
  std::string bytes = io::read_file(path);
  io::BinaryReader reader(bytes);
  if (bytes.size() < kStoreMagic.size() ||
      std::string_view(bytes).substr(0, kStoreMagic.size()) != kStoreMagic) {
    throw StoreError("bad magic in " + path.string());
  }
  reader.seek(kStoreMagic.size());

  PassageStore store;
  std::uint64_t doc_count = reader.u64();
  struct TableEntry {
    std::string title;
    std::vector<std::uint64_t> offsets;
  };
  std::vector<TableEntry> table;
  table.reserve(doc_count);
  for (std::uint64_t d = 0; d < doc_count; ++d) {
    TableEntry entry;
    entry.title = reader.str();
    std::uint64_t passage_count = reader.u64();
    entry.offsets.reserve(passage_count);
    for (std::uint64_t p = 0; p < passage_count; ++p) {
      std::uint64_t off = reader.u64();
      if (off > bytes.size()) {
        throw StoreError("offset out of range in " + path.string());
      }
      entry.offsets.push_back(off);
    }
    table.push_back(std::move(entry));
  }

  for (TableEntry& entry : table) {
    std::size_t begin = store.passages_.size();
    for (std::size_t i = 0; i < entry.offsets.size(); ++i) {
      reader.seek(entry.offsets[i]);
      Passage p;
      p.doc_title = entry.title;
      p.index = i;
      p.text = reader.str();
      p.word_count = reader.u64();
      p.oversized = (reader.u64() & 1) != 0;
      if (p.word_count == 0 || p.word_count != text::count_words(p.text)) {
        throw StoreError("inconsistent passage blob in " + path.string());
      }
      store.passages_.push_back(std::move(p));
    }
    store.doc_index_.emplace(entry.title, store.titles_.size());
    store.spans_.emplace_back(begin, entry.offsets.size());
    store.titles_.push_back(std::move(entry.title));
  }
  return store;
}

std::vector<Passage> PassageStore::get(std::string_view title) const {
  auto it = doc_index_.find(std::string(title));
  if (it == doc_index_.end()) return {};
  auto [begin, count] = spans_[it->second];
  return std::vector<Passage>(passages_.begin() + static_cast<std::ptrdiff_t>(begin),
                              passages_.begin() + static_cast<std::ptrdiff_t>(begin + count));
}

}  // namespace facteval::corpus
