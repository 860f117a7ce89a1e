// Acceptance suite: runs every release gate and prints one PASS/FAIL line
// per criterion. Exits nonzero when any gate fails. Everything here runs
// offline against deterministic mocks and frozen reference values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "facteval/afg.hpp"
#include "facteval/afv.hpp"
#include "facteval/commands.hpp"
#include "facteval/evalharness.hpp"
#include "facteval/mock_backend.hpp"
#include "facteval/scoring.hpp"
#include "support/pipeline_fixture.hpp"
#include "support/test_util.hpp"

#ifndef FACTEVAL_TEST_DATA_DIR
#define FACTEVAL_TEST_DATA_DIR "tests/data"
#endif

using namespace facteval;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string name) : number_(number), name_(std::move(name)) {}

  void require(bool condition, const std::string& detail) {
    if (!condition) {
      ok_ = false;
      details_.push_back(detail);
    }
  }

  void fail(const std::string& detail) { require(false, detail); }

  ~Criterion() {
    std::printf("%s  criterion %2d: %s\n", ok_ ? "PASS" : "FAIL", number_, name_.c_str());
    if (!ok_) {
      for (const std::string& d : details_) std::printf("      - %s\n", d.c_str());
      ++g_failures;
    }
  }

 private:
  int number_;
  std::string name_;
  bool ok_ = true;
  std::vector<std::string> details_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string golden(const std::string& name) {
  std::string content =
      io::read_file(std::filesystem::path(FACTEVAL_TEST_DATA_DIR) / "golden" / name);
  if (!content.empty() && content.back() == '\n') content.pop_back();
  return content;
}

afv::Verdict verdict_with(afv::Label label) {
  afv::Verdict v;
  v.label = label;
  return v;
}

constexpr afv::Label S = afv::Label::Supported;
constexpr afv::Label NS = afv::Label::NotSupported;

// Reference values under test (human FS row, per-evaluator ER/FS cells,
// cumulative |ER|, and the three 10-model score columns).
constexpr double kHumanFs[3] = {42.5, 58.3, 71.5};
struct EvalRow {
  const char* name;
  double er[3];
  double fs[3];
  double cumulative;
};
constexpr EvalRow kEvalRows[4] = {
    {"Llama3.1", {-2.8, 1.6, 9.0}, {45.3, 56.7, 62.5}, 13.4},
    {"Gemma", {-6.3, -1.7, 4.2}, {48.8, 60.0, 67.3}, 12.2},
    {"Qwen", {-0.3, 8.6, 18.9}, {42.8, 49.7, 52.6}, 27.8},
    {"Olmo", {-24.6, -20.1, -10.9}, {67.1, 78.4, 82.4}, 55.6},
};
const std::vector<std::string> kModels = {
    "GPT-4",       "ChatGPT",    "Alpaca 65B", "InstructGPT", "Alpaca 13B",
    "Vicuna 7B",   "MPT Chat 7B", "Pythia 12B", "Dolly 12B",   "StableLM 7B"};
const std::vector<double> kFsA = {73.1, 71.6, 55.6, 52.8, 47.7, 38.9, 30.1, 25.1, 21.7, 17.3};
const std::vector<double> kFsB = {59.9, 60.4, 46.3, 41.7, 40.3, 36.9, 27.9, 20.8, 17.1, 16.3};
const std::vector<double> kFsOurs = {50.08, 46.52, 37.14, 35.89, 30.03,
                                     29.05, 20.65, 16.23, 13.45, 9.20};

void criterion_1_factscore_arithmetic() {
  Criterion c(1, "FActScore arithmetic: 3/5 fixture and macro/micro fixture");
  auto start = std::chrono::steady_clock::now();

  std::vector<afv::Verdict> five = {verdict_with(S), verdict_with(NS), verdict_with(S),
                                    verdict_with(S), verdict_with(NS)};
  auto report = scoring::topic_factscore("fixture", five);
  c.require(report.factscore.has_value() && *report.factscore == 0.6,
            "5-verdict fixture must be exactly 0.6");

  std::vector<scoring::TopicReport> mixed;
  std::vector<afv::Verdict> one = {verdict_with(S)};
  mixed.push_back(scoring::topic_factscore("one", one));
  std::vector<afv::Verdict> nine(9, verdict_with(NS));
  mixed.push_back(scoring::topic_factscore("nine", nine));
  auto run = scoring::aggregate(mixed, "fixture-model");
  c.require(run.factscore == 0.5, "macro over sizes (1, 9) must be exactly 0.5");

  std::size_t supported = 0;
  std::size_t total = 0;
  for (const auto& r : run.topic_reports) {
    supported += r.num_supported;
    total += r.num_facts;
  }
  c.require(static_cast<double>(supported) / static_cast<double>(total) == 0.1,
            "micro over the same fixture must be 0.1");

  c.require(seconds_since(start) < 1.0, "runtime must stay under 1s");
}

void criterion_2_error_rate_cells() {
  Criterion c(2, "Error Rate: all 12 published (human, estimated) pairs within +/-0.05");
  for (const EvalRow& row : kEvalRows) {
    for (int s = 0; s < 3; ++s) {
      double er = evalharness::error_rate(kHumanFs[s], row.fs[s]);
      std::ostringstream detail;
      detail << row.name << " subject " << s << ": got " << er << ", expected " << row.er[s];
      c.require(std::fabs(er - row.er[s]) <= 0.05, detail.str());
    }
  }
  double example = evalharness::error_rate(42.5, 45.3);
  c.require(std::fabs(example - (-2.8)) <= 0.05, "(42.5, 45.3) must give -2.8");
}

void criterion_3_cumulative_er() {
  Criterion c(3, "Cumulative ER: sum of |ER| per evaluator row, +/-0.05");
  for (const EvalRow& row : kEvalRows) {
    std::vector<double> ers;
    for (int s = 0; s < 3; ++s) ers.push_back(evalharness::error_rate(kHumanFs[s], row.fs[s]));
    double cumulative = evalharness::cumulative_error_rate(ers);
    std::ostringstream detail;
    detail << row.name << ": got " << cumulative << ", expected " << row.cumulative;
    c.require(std::fabs(cumulative - row.cumulative) <= 0.05, detail.str());
  }
}

void criterion_4_correlations() {
  Criterion c(4, "Correlations: pearson(A|B vs ours) > 0.99, spearman(A vs ours) = 1.0");
  auto start = std::chrono::steady_clock::now();
  evalharness::ScoreVector a{"FS (A)", kModels, kFsA};
  evalharness::ScoreVector b{"FS (B)", kModels, kFsB};
  evalharness::ScoreVector ours{"FS (OFS)", kModels, kFsOurs};

  double pa = evalharness::pearson(a, ours);
  double pb = evalharness::pearson(b, ours);
  double sa = evalharness::spearman_rank(a, ours);
  c.require(pa > 0.99, "pearson(A, ours) = " + std::to_string(pa));
  c.require(pb > 0.99, "pearson(B, ours) = " + std::to_string(pb));
  c.require(sa == 1.0, "spearman(A, ours) = " + std::to_string(sa));
  c.require(seconds_since(start) < 1.0, "runtime must stay under 1s");
}

void criterion_5_ensemble_rule() {
  Criterion c(5, "Ensemble rule: exhaustive truth table plus randomized property");
  c.require(afv::ensemble_verdict(verdict_with(S), verdict_with(S)).label == S, "(S,S) -> S");
  c.require(afv::ensemble_verdict(verdict_with(S), verdict_with(NS)).label == NS, "(S,NS) -> NS");
  c.require(afv::ensemble_verdict(verdict_with(NS), verdict_with(S)).label == NS, "(NS,S) -> NS");
  c.require(afv::ensemble_verdict(verdict_with(NS), verdict_with(NS)).label == NS,
            "(NS,NS) -> NS");

  std::mt19937 rng(1234);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < 1000; ++i) {
    afv::Verdict x = verdict_with(coin(rng) ? S : NS);
    afv::Verdict y = verdict_with(coin(rng) ? S : NS);
    afv::Verdict e = afv::ensemble_verdict(x, y);
    bool holds = (e.label == S) == (x.label == S && y.label == S);
    if (!holds) {
      c.fail("property violated at trial " + std::to_string(i));
      break;
    }
  }
}

void criterion_6_bm25_oracle() {
  Criterion c(6, "BM25 oracle: 200 random corpora, top_k equals brute-force sort");
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(777);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto items = testutil::random_corpus(rng, 50);
    auto index = retrieval::InvertedIndex::build(items);
    std::string query = testutil::random_query(rng);
    auto hits = index.top_k(query, 10);
    auto brutes = testutil::bm25_brute_top_k(items, query, 10);
    if (hits.size() != brutes.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
      if (hits[i].item_id != brutes[i].item_id ||
          std::fabs(hits[i].score - brutes[i].score) > 1e-9) {
        ++mismatches;
        break;
      }
    }
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " of 200 trials mismatched");
  c.require(seconds_since(start) < 10.0, "runtime must stay under 10s");
}

void criterion_7_parser_totality() {
  Criterion c(7, "Verdict parser: total over 10,000 arbitrary byte strings, fixtures hold");
  std::mt19937 rng(4242);
  std::uniform_int_distribution<int> len(0, 300);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    int n = len(rng);
    for (int j = 0; j < n; ++j) s.push_back(static_cast<char>(byte(rng)));
    try {
      afv::Verdict v = afv::parse_verdict(s);
      if (v.label != S && v.label != NS) {
        c.fail("undefined label at trial " + std::to_string(i));
        break;
      }
    } catch (const std::exception& e) {
      c.fail("parse_verdict threw at trial " + std::to_string(i) + ": " + e.what());
      break;
    }
  }
  c.require(afv::parse_verdict("True, supported.").label == S, "first-occurrence: True leads");
  c.require(afv::parse_verdict("The claim is false because...").label == NS,
            "first-occurrence: false leads");
  c.require(afv::parse_verdict("Truthfully, False.").label == NS,
            "word boundary: 'Truthfully' must not count as True");
  c.require(afv::parse_verdict("untrue and falsely").no_answer,
            "word boundary: substrings must not match");
  c.require(afv::parse_verdict("nothing here").label == NS, "absent answer maps to NotSupported");
}

void criterion_8_end_to_end_determinism() {
  Criterion c(8, "End-to-end determinism: 3 identical runs, byte-identical artifacts");
  try {
    testutil::TempDir dir;
    auto fixture = testutil::build_pipeline_fixture(dir, testutil::standard_topics());
    std::vector<std::string> factsets;
    std::vector<std::string> verdicts;
    std::vector<std::string> reports;
    for (int run = 0; run < 3; ++run) {
      auto config = fixture.config;
      config.output_dir = dir.file("out" + std::to_string(run));
      auto outcome = commands::cmd_score(config, fixture.generations_path);
      if (outcome.exit_code != commands::kOk) {
        c.fail("run " + std::to_string(run) + " exited " + std::to_string(outcome.exit_code));
        return;
      }
      factsets.push_back(io::read_file(outcome.factset_path));
      verdicts.push_back(io::read_file(outcome.verdicts_path));
      reports.push_back(io::read_file(outcome.report_path));
    }
    c.require(!factsets[0].empty(), "factset must not be empty");
    c.require(factsets[0] == factsets[1] && factsets[1] == factsets[2],
              "factset files differ across runs");
    c.require(verdicts[0] == verdicts[1] && verdicts[1] == verdicts[2],
              "verdict files differ across runs");
    c.require(reports[0] == reports[1] && reports[1] == reports[2],
              "run reports differ across runs");
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
}

void criterion_9_prompt_goldens() {
  Criterion c(9, "Prompt byte-exactness against golden files");
  try {
    afg::Sentence sentence{"Ada Lovelace was an English mathematician and writer.", 0};
    afg::DemoEntry demo{"Albert Einstein was a German-born theoretical physicist.",
                        {"Albert Einstein was German-born.",
                         "Albert Einstein was a theoretical physicist."}};
    auto afg_messages = afg::build_afg_prompt(sentence, demo);
    c.require(afg_messages[0].content == golden("afg_system.golden"),
              "AFG system message mismatch");
    c.require(afg_messages[1].content == golden("afg_user.golden"), "AFG user message mismatch");

    afg::AtomicFact fact{"Ada Lovelace was born in 1815.", 0, 0};
    std::vector<corpus::Passage> passages(2);
    passages[0].doc_title = "Ada Lovelace";
    passages[0].index = 0;
    passages[0].text = "Ada Lovelace was born in London in 1815.";
    passages[0].word_count = 8;
    passages[1].doc_title = "Ada Lovelace";
    passages[1].index = 1;
    passages[1].text = "She wrote the first published computer program.";
    passages[1].word_count = 7;
    auto afv_messages = afv::build_afv_prompt("Ada Lovelace", fact, passages);
    c.require(afv_messages[0].content == golden("afv_system.golden"),
              "AFV system message mismatch");
    c.require(afv_messages[1].content == golden("afv_user.golden"), "AFV user message mismatch");
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
}

void criterion_10_afg_best_match_oracle() {
  Criterion c(10, "AFG best-match oracle: 3-sentence fixture equals hand computation");
  // Hand computation (token F1, exhaustive max-then-mean):
  //   s0: best(1.0), best(4/7)   s1: best(1.0)   s2: best(1.0), best(0.0)
  //   mean over 5 facts = (3 + 4/7) / 5 = 5/7.
  const double kExpected = 5.0 / 7.0;

  afg::FactSet generated;
  generated.topic = "T";
  auto add_sentence = [&](std::size_t index, const std::string& text,
                          const std::vector<std::string>& facts) {
    afg::SentenceFacts sf;
    sf.sentence = afg::Sentence{text, index};
    for (std::size_t f = 0; f < facts.size(); ++f) {
      sf.facts.push_back(afg::AtomicFact{facts[f], index, f});
    }
    generated.sentences.push_back(sf);
  };
  add_sentence(0, "s0", {"ada was born", "ada was a poet"});
  add_sentence(1, "s1", {"she died in 1852"});
  add_sentence(2, "s2", {"the engine was mechanical", "it used punch cards"});

  std::vector<evalharness::SentenceAnnotation> annotated(3);
  auto human = [](const std::string& text) {
    return evalharness::HumanFact{text, afv::Label::Supported};
  };
  annotated[0].text = "s0";
  annotated[0].human_facts = {human("ada was born"), human("ada wrote notes")};
  annotated[1].text = "s1";
  annotated[1].human_facts = {human("she died in 1852"), human("x y z")};
  annotated[2].text = "s2";
  annotated[2].human_facts = {human("the engine was mechanical")};

  try {
    auto token_result = evalharness::afg_best_match(
        generated, annotated,
        [](std::string_view a, std::string_view b) { return evalharness::token_f1(a, b); });
    c.require(token_result.facts_scored == 5, "expected 5 scored facts");
    c.require(std::fabs(token_result.mean_best - kExpected) < 1e-15,
              "token_f1 mean " + std::to_string(token_result.mean_best) + " != 5/7");

    // Scripted mock: every distinct token gets its own basis vector, so
    // greedy embedding F1 reproduces the same hand numbers.
    backends::MockBackend::Script script;
    std::vector<std::string> vocabulary = {
        "ada", "was",  "born",  "a",    "poet", "wrote", "notes", "she",   "died",  "in", "1852",
        "x",   "y",    "z",     "the",  "engine", "mechanical", "it", "used", "punch", "cards"};
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
      std::vector<double> basis(vocabulary.size(), 0.0);
      basis[i] = 1.0;
      script.embed[backends::embed_digest(vocabulary[i])] = basis;
    }
    backends::MockBackend mock(std::move(script));
    auto embed_result = evalharness::afg_best_match(
        generated, annotated, [&](std::string_view a, std::string_view b) {
          return evalharness::greedy_embedding_f1(a, b, mock);
        });
    c.require(std::fabs(embed_result.mean_best - kExpected) < 1e-9,
              "embedding mean " + std::to_string(embed_result.mean_best) + " != 5/7 +/- 1e-9");
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
}

void criterion_11_human_factscore() {
  Criterion c(11, "Human FS from annotations: synthetic exact; released sets when present");
  try {
    testutil::TempDir dir;
    auto sentence_json = [](const std::string& text, bool relevant,
                            const std::vector<std::pair<std::string, std::string>>& facts) {
      nlohmann::json fact_array = nlohmann::json::array();
      for (const auto& [t, label] : facts) {
        fact_array.push_back(nlohmann::json{{"text", t}, {"label", label}});
      }
      return nlohmann::json{
          {"text", text}, {"is-relevant", relevant}, {"human-atomic-facts", fact_array}};
    };
    std::vector<nlohmann::json> records = {
        {{"topic", "A"},
         {"annotations",
          nlohmann::json::array(
              {sentence_json("s1", true, {{"f1", "S"}, {"f2", "S"}, {"f3", "NS"}}),
               sentence_json("skip", false, {{"f4", "NS"}})})}},
        {{"topic", "B"},
         {"annotations", nlohmann::json::array({sentence_json("s1", true,
                                                              {{"f1", "S"}, {"f2", "NS"}})})}},
    };
    io::write_jsonl(dir.file("annotations.jsonl"), records);
    auto loaded = evalharness::load_annotations(dir.file("annotations.jsonl"));
    double fs = evalharness::human_factscore(loaded);
    // macro of (2/3, 1/2) = 7/12 -> 58.333... percent
    c.require(std::fabs(fs - 100.0 * 7.0 / 12.0) < 1e-9,
              "synthetic human FS " + std::to_string(fs) + " != 58.333...");

    const char* external = std::getenv("FACTEVAL_ANNOTATIONS_DIR");
    if (external != nullptr) {
      const std::pair<const char*, double> sets[3] = {{"InstructGPT.jsonl", 42.5},
                                                      {"ChatGPT.jsonl", 58.3},
                                                      {"PerplexityAI.jsonl", 71.5}};
      for (const auto& [file, expected] : sets) {
        auto path = std::filesystem::path(external) / file;
        if (!std::filesystem::exists(path)) continue;
        double got = evalharness::human_factscore(evalharness::load_annotations(path));
        std::ostringstream detail;
        detail << file << ": got " << got << ", expected " << expected << " +/- 0.5";
        c.require(std::fabs(got - expected) <= 0.5, detail.str());
      }
    }
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  criterion_1_factscore_arithmetic();
  criterion_2_error_rate_cells();
  criterion_3_cumulative_er();
  criterion_4_correlations();
  criterion_5_ensemble_rule();
  criterion_6_bm25_oracle();
  criterion_7_parser_totality();
  criterion_8_end_to_end_determinism();
  criterion_9_prompt_goldens();
  criterion_10_afg_best_match_oracle();
  criterion_11_human_factscore();
  std::printf("================\n%s (%d failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILED",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
