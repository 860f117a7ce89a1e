#include "facteval/afg.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "facteval/errors.hpp"
#include "facteval/io/jsonl.hpp"
#include "facteval/retrieval.hpp"
#include "facteval/util/parallel.hpp"
#include "facteval/util/text.hpp"

namespace facteval::afg {

namespace {

constexpr std::string_view kAfgSystemTemplate =
    "You are an annotator that breaks down sentences into independent facts, short statements "
    "that each contain one piece of information contained in the given sentence. In the next "
    "paragraphs you have examples of sentences broken down in atomic facts. You have to complete "
    "the example given by the user. Do not add new entities, do not deviate from the subject of "
    "the sentence given by the user, do not hallucinate, do not repeat facts in the system "
    "prompt. List the sentences using -\n"
    "\n"
    "Please break down the following sentence into independent facts: <demo>";

constexpr std::string_view kAfgUserTemplate =
    "Please break down the following sentence into independent facts: <sentence>";

std::string replace_once(std::string_view text, std::string_view placeholder,
                         std::string_view value) {
  std::string out(text);
  std::size_t pos = out.find(placeholder);
  if (pos != std::string::npos) out.replace(pos, placeholder.size(), value);
  return out;
}

/// Returns the fact text when the line carries a list marker, else nullopt.
std::optional<std::string> strip_list_marker(std::string_view line) {
  std::string_view rest = text::trim(line);
  if (rest.empty()) return std::nullopt;
  if (rest.starts_with("-") || rest.starts_with("*")) {
    return std::string(text::trim(rest.substr(1)));
  }
  if (rest.starts_with("\xE2\x80\xA2")) {  // U+2022 bullet
    return std::string(text::trim(rest.substr(3)));
  }
  std::size_t digits = 0;
  while (digits < rest.size() && rest[digits] >= '0' && rest[digits] <= '9') ++digits;
  if (digits > 0 && digits < rest.size() && rest[digits] == '.') {
    return std::string(text::trim(rest.substr(digits + 1)));
  }
  return std::nullopt;
}

std::string strip_reasoning_block(std::string_view output, const AfgOptions& options) {
  std::string out(output);
  if (!options.strip_reasoning || options.reasoning_open.empty() ||
      options.reasoning_close.empty()) {
    return out;
  }
  while (true) {
    std::size_t open = out.find(options.reasoning_open);
    if (open == std::string::npos) return out;
    std::size_t close = out.find(options.reasoning_close, open);
    if (close == std::string::npos) return out;
    out.erase(open, close + options.reasoning_close.size() - open);
  }
}

}  // namespace

std::size_t FactSet::total_facts() const {
  std::size_t n = 0;
  for (const SentenceFacts& sf : sentences) n += sf.facts.size();
  return n;
}

std::vector<AtomicFact> FactSet::flatten() const {
  std::vector<AtomicFact> out;
  out.reserve(total_facts());
  for (const SentenceFacts& sf : sentences) {
    out.insert(out.end(), sf.facts.begin(), sf.facts.end());
  }
  return out;
}

const std::vector<std::string>& default_abstention_patterns() {
  static const std::vector<std::string> kPatterns = {
      "I'm sorry",       "I am sorry",     "I could not find", "I couldn't find",
      "I don't have information", "I apologize", "as an AI",   "no information",
  };
  return kPatterns;
}

std::vector<Sentence> split_sentences(std::string_view output) {
  std::vector<Sentence> out;
  for (std::string& s : text::split_sentence_strings(output)) {
    out.push_back(Sentence{std::move(s), out.size()});
  }
  return out;
}

bool detect_abstention(std::string_view output) {
  return detect_abstention(output, default_abstention_patterns());
}

bool detect_abstention(std::string_view output, std::span<const std::string> patterns) {
  std::vector<std::string> sentences = text::split_sentence_strings(output);
  std::size_t scan = std::min<std::size_t>(sentences.size(), 2);
  for (std::size_t i = 0; i < scan; ++i) {
    for (const std::string& pattern : patterns) {
      if (text::ifind(sentences[i], pattern) != std::string_view::npos) return true;
    }
  }
  return false;
}

std::vector<backends::ChatMessage> build_afg_prompt(const Sentence& sentence,
                                                    const DemoEntry& demo) {
  std::string demo_block = demo.sentence;
  for (const std::string& fact : demo.facts) {
    demo_block += "\n- " + fact;
  }
  return {
      {backends::Role::system, replace_once(kAfgSystemTemplate, "<demo>", demo_block)},
      {backends::Role::user, replace_once(kAfgUserTemplate, "<sentence>", sentence.text)},
  };
}

std::vector<AtomicFact> parse_atomic_facts(std::string_view model_output,
                                           std::size_t sentence_index, const AfgOptions& options,
                                           std::string* diagnostic) {
  std::string cleaned = strip_reasoning_block(model_output, options);

  std::vector<AtomicFact> out;
  std::size_t line_start = 0;
  while (line_start <= cleaned.size()) {
    std::size_t line_end = cleaned.find('\n', line_start);
    if (line_end == std::string::npos) line_end = cleaned.size();
    std::string_view line(cleaned.data() + line_start, line_end - line_start);
    line_start = line_end + 1;

    std::optional<std::string> fact = strip_list_marker(line);
    if (!fact || fact->empty()) continue;
    if (text::ifind(*fact, "independent facts") != std::string_view::npos) continue;
    bool duplicate = std::any_of(out.begin(), out.end(),
                                 [&](const AtomicFact& f) { return f.text == *fact; });
    if (duplicate) continue;
    out.push_back(AtomicFact{std::move(*fact), sentence_index, out.size()});
  }

  if (out.empty() && diagnostic) {
    *diagnostic = "no list-marker lines found in model output";
  }
  return out;
}

const DemoEntry& select_demo(std::span<const DemoEntry> pool, std::string_view sentence) {
  if (pool.empty()) throw Error("select_demo: empty demo pool");
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const DemoEntry& d : pool) texts.push_back(d.sentence);
  return pool[retrieval::select_best_index(texts, sentence)];
}

FactSet generate_facts(backends::Backend& backend, const SubjectGeneration& generation,
                       std::span<const DemoEntry> demo_pool,
                       const backends::GenerationParams& params, const AfgOptions& options) {
  if (generation.topic.empty()) throw Error("generation topic must be non-empty");
  if (demo_pool.empty()) throw Error("generate_facts: empty demo pool");

  FactSet result;
  result.topic = generation.topic;

  std::span<const std::string> patterns = options.abstention_patterns.empty()
                                              ? std::span<const std::string>(
                                                    default_abstention_patterns())
                                              : std::span<const std::string>(
                                                    options.abstention_patterns);
  if (detect_abstention(generation.output, patterns)) {
    result.abstained = true;
    return result;
  }

  std::vector<Sentence> sentences = split_sentences(generation.output);
  struct SentenceOutcome {
    std::vector<AtomicFact> facts;
    std::string error;
    std::string diagnostic;
  };
  std::vector<SentenceOutcome> outcomes(sentences.size());

  parallel::for_each_index(
      sentences.size(), static_cast<std::size_t>(backend.parallelism()), [&](std::size_t i) {
        const Sentence& sentence = sentences[i];
        try {
          const DemoEntry& demo = select_demo(demo_pool, sentence.text);
          std::string response = backend.chat(build_afg_prompt(sentence, demo), params);
          outcomes[i].facts =
              parse_atomic_facts(response, sentence.index, options, &outcomes[i].diagnostic);
        } catch (const std::exception& e) {
          outcomes[i].error = e.what();
        }
      });

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!outcomes[i].error.empty()) {
      result.failures.push_back(FailureRecord{i, outcomes[i].error});
      continue;
    }
    if (!outcomes[i].diagnostic.empty()) {
      result.diagnostics.push_back(Diagnostic{i, outcomes[i].diagnostic});
    }
    result.sentences.push_back(SentenceFacts{sentences[i], std::move(outcomes[i].facts)});
  }
  return result;
}

std::vector<DemoEntry> load_demo_pool(const std::filesystem::path& path) {
  std::vector<DemoEntry> pool;
  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (!record.contains("sentence") || !record.contains("facts") ||
        !record["facts"].is_array() || record["facts"].empty()) {
      throw ConfigError("demo pool " + path.string() + " line " + std::to_string(line) +
                        ": need sentence and non-empty facts");
    }
    pool.push_back(DemoEntry{record["sentence"].get<std::string>(),
                             record["facts"].get<std::vector<std::string>>()});
  });
  if (pool.empty()) throw ConfigError("demo pool " + path.string() + " is empty");
  return pool;
}

void write_factsets(const std::filesystem::path& path, std::span<const FactSet> factsets) {
  std::vector<nlohmann::json> records;
  for (const FactSet& fs : factsets) {
    if (fs.abstained) {
      records.push_back({{"topic", fs.topic},
                         {"sentence_index", -1},
                         {"sentence", ""},
                         {"facts", nlohmann::json::array()},
                         {"abstained", true},
                         {"failures", nlohmann::json::array()}});
      continue;
    }
    std::map<std::size_t, std::vector<std::string>> failure_map;
    for (const FailureRecord& f : fs.failures) failure_map[f.sentence_index].push_back(f.error);
    for (const SentenceFacts& sf : fs.sentences) {
      std::vector<std::string> facts;
      for (const AtomicFact& f : sf.facts) facts.push_back(f.text);
      records.push_back({{"topic", fs.topic},
                         {"sentence_index", sf.sentence.index},
                         {"sentence", sf.sentence.text},
                         {"facts", facts},
                         {"abstained", false},
                         {"failures", nlohmann::json::array()}});
    }
    for (const auto& [sentence_index, errors] : failure_map) {
      records.push_back({{"topic", fs.topic},
                         {"sentence_index", sentence_index},
                         {"sentence", ""},
                         {"facts", nlohmann::json::array()},
                         {"abstained", false},
                         {"failures", errors}});
    }
  }
  io::write_jsonl(path, records);
}

std::vector<FactSet> load_factsets(const std::filesystem::path& path) {
  std::vector<FactSet> out;
  std::map<std::string, std::size_t> by_topic;

  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (!record.contains("topic") || !record.contains("sentence_index")) {
      throw ConfigError("factset file " + path.string() + " line " + std::to_string(line) +
                        ": need topic and sentence_index");
    }
    std::string topic = record["topic"].get<std::string>();
    auto [it, inserted] = by_topic.emplace(topic, out.size());
    if (inserted) {
      out.push_back(FactSet{});
      out.back().topic = topic;
    }
    FactSet& fs = out[it->second];

    if (record.value("abstained", false)) {
      fs.abstained = true;
      return;
    }
    long long sentence_index = record["sentence_index"].get<long long>();
    if (sentence_index < 0) return;
    auto idx = static_cast<std::size_t>(sentence_index);

    if (record.contains("failures") && record["failures"].is_array() &&
        !record["failures"].empty()) {
      for (const auto& e : record["failures"]) {
        fs.failures.push_back(FailureRecord{idx, e.get<std::string>()});
      }
      return;
    }
    SentenceFacts sf;
    sf.sentence = Sentence{record.value("sentence", std::string()), idx};
    if (record.contains("facts")) {
      std::size_t fact_index = 0;
      for (const auto& f : record["facts"]) {
        sf.facts.push_back(AtomicFact{f.get<std::string>(), idx, fact_index++});
      }
    }
    fs.sentences.push_back(std::move(sf));
  });

  for (FactSet& fs : out) {
    std::sort(fs.sentences.begin(), fs.sentences.end(),
              [](const SentenceFacts& a, const SentenceFacts& b) {
                return a.sentence.index < b.sentence.index;
              });
  }
  if (out.empty()) throw ConfigError("factset file " + path.string() + " is empty");
  return out;
}

}  // namespace facteval::afg
