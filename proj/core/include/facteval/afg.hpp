#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facteval/backends.hpp"

namespace facteval::afg {

struct SubjectGeneration {
  std::string topic;   // the prompted entity; non-empty
  std::string input;   // prompt given to the subject model
  std::string output;  // subject model response
};

struct Sentence {
  std::string text;
  std::size_t index = 0;
};

struct AtomicFact {
  std::string text;  // no leading list marker
  std::size_t sentence_index = 0;
  std::size_t fact_index = 0;
};

struct DemoEntry {
  std::string sentence;
  std::vector<std::string> facts;  // non-empty
};

struct SentenceFacts {
  Sentence sentence;
  std::vector<AtomicFact> facts;
};

struct FailureRecord {
  std::size_t sentence_index = 0;
  std::string error;
};

struct Diagnostic {
  std::size_t sentence_index = 0;
  std::string message;
};

struct FactSet {
  std::string topic;
  bool abstained = false;
  std::vector<SentenceFacts> sentences;  // ascending sentence index
  std::vector<FailureRecord> failures;
  std::vector<Diagnostic> diagnostics;

  std::size_t total_facts() const;
  std::vector<AtomicFact> flatten() const;
};

struct AfgOptions {
  std::vector<std::string> abstention_patterns;  // empty = defaults
  /// Strip a reasoning block before parsing when both tags are present.
  bool strip_reasoning = true;
  std::string reasoning_open = "<think>";
  std::string reasoning_close = "</think>";
};

const std::vector<std::string>& default_abstention_patterns();

/// Sentence segmentation of a subject generation (trimmed, empties dropped,
/// indices consecutive from 0).
std::vector<Sentence> split_sentences(std::string_view output);

/// True when any configured pattern occurs (case-insensitively) within the
/// first two sentences.
bool detect_abstention(std::string_view output);
bool detect_abstention(std::string_view output, std::span<const std::string> patterns);

/// Two messages: the fact-decomposition system prompt with the demo spliced
/// in (demo sentence, then one "- " line per demo fact), and the user request
/// carrying the sentence. Substitution is literal; no escaping.
std::vector<backends::ChatMessage> build_afg_prompt(const Sentence& sentence,
                                                    const DemoEntry& demo);

/// Extracts "- " / "*" / bullet / "1." list items: marker stripped, trimmed,
/// empties and exact duplicates dropped (first kept), instruction restatements
/// (lines containing "independent facts") dropped. A nullptr-safe diagnostic
/// is emitted when nothing parses.
std::vector<AtomicFact> parse_atomic_facts(std::string_view model_output,
                                           std::size_t sentence_index,
                                           const AfgOptions& options = {},
                                           std::string* diagnostic = nullptr);

/// Top-1 BM25 demo for the sentence; pool[0] when every score is 0.
/// Throws Error on an empty pool.
const DemoEntry& select_demo(std::span<const DemoEntry> pool, std::string_view sentence);

/// Full AFG pass over one generation: abstention gate, then one backend call
/// per sentence (demo chosen per sentence), parsed into facts. Sentence calls
/// may run concurrently under the backend's parallelism bound; results are
/// merged by sentence index. Transport/protocol failures are recorded per
/// sentence and do not abort the pass.
FactSet generate_facts(backends::Backend& backend, const SubjectGeneration& generation,
                       std::span<const DemoEntry> demo_pool,
                       const backends::GenerationParams& params = {},
                       const AfgOptions& options = {});

/// Demo pool file: {"sentence": ..., "facts": [...]} per line.
std::vector<DemoEntry> load_demo_pool(const std::filesystem::path& path);

/// FactSet files: one record per sentence ({topic, sentence_index, sentence,
/// facts, abstained, failures}); an abstained generation writes a single
/// record with sentence_index -1.
void write_factsets(const std::filesystem::path& path, std::span<const FactSet> factsets);
std::vector<FactSet> load_factsets(const std::filesystem::path& path);

}  // namespace facteval::afg
