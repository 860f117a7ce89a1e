#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace facteval::corpus {

inline constexpr std::size_t kDefaultChunkSize = 256;
inline constexpr std::size_t kMinChunkSize = 16;

struct Document {
  std::string title;  // unique, non-empty
  std::string text;   // may be empty (stub articles)
};

struct Passage {
  std::string doc_title;
  std::size_t index = 0;  // 0-based ordinal within the document
  std::string text;
  std::size_t word_count = 0;
  bool oversized = false;  // single sentence longer than chunk_size
};

struct IngestStats {
  std::size_t documents = 0;
  std::size_t passages = 0;
  std::size_t skipped = 0;     // malformed records
  std::size_t duplicates = 0;  // duplicate titles (last record wins)
};

/// Greedy sentence-aligned packing. Whitespace is normalized first; sentences
/// are appended until the next one would push the chunk past chunk_size
/// words. A single sentence longer than chunk_size becomes its own chunk,
/// flagged oversized. Joining the passages of a document with single spaces
/// reconstructs its whitespace-normalized text.
std::vector<Passage> chunk_document(const Document& doc,
                                    std::size_t chunk_size = kDefaultChunkSize);

/// Reads a line-delimited dump ({"title": ..., "text": ...} per line), chunks
/// every well-formed document, and writes the store. Re-ingesting replaces
/// the store. Malformed records are counted in skipped; a duplicate title is
/// counted and its last record wins.
IngestStats ingest_dump(const std::filesystem::path& dump_path,
                        const std::filesystem::path& store_path,
                        std::size_t chunk_size = kDefaultChunkSize);

/// Single-file store: magic "FEKB1\n", little-endian u64 integers,
/// length-prefixed UTF-8 strings. Layout: magic, document count, then per
/// document (title, passage count, absolute blob offsets), then passage
/// blobs (text, word_count, flags; flag bit 0 = oversized). Documents are
/// stored sorted by title, so ingestion is byte-deterministic.
class PassageStore {
 public:
  /// Parses and verifies the whole file. Throws StoreError on bad magic,
  /// truncation, or out-of-range offsets; IoError if unreadable.
  static PassageStore open(const std::filesystem::path& path);

  /// Passages of one document in index order; empty if the title is absent.
  /// Lookup is exact: no case folding or normalization.
  std::vector<Passage> get(std::string_view title) const;

  const std::vector<std::string>& titles() const { return titles_; }
  const std::vector<Passage>& all() const { return passages_; }
  std::size_t document_count() const { return titles_.size(); }
  std::size_t passage_count() const { return passages_.size(); }

 private:
  std::vector<std::string> titles_;
  std::vector<Passage> passages_;                          // grouped by document
  std::unordered_map<std::string, std::size_t> doc_index_;  // title -> titles_ pos
  std::vector<std::pair<std::size_t, std::size_t>> spans_;  // doc -> [begin, count) in passages_
};

/// Chunks and serializes documents into the store format (sorted by title).
/// Returns the total passage count.
std::size_t write_store(const std::filesystem::path& path,
                        const std::vector<Document>& documents,
                        std::size_t chunk_size = kDefaultChunkSize);

inline constexpr std::string_view kStoreMagic = "FEKB1\n";

}  // namespace facteval::corpus
