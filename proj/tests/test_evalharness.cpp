#include <cmath>
#include <cstdlib>
#include <random>

#include "doctest.h"

#include "facteval/errors.hpp"
#include "facteval/evalharness.hpp"
#include "facteval/mock_backend.hpp"
#include "support/test_util.hpp"

using namespace facteval;
using backends::MockBackend;
using evalharness::AnnotationRecord;
using evalharness::ScoreVector;
using evalharness::SentenceAnnotation;

namespace {

// Published reference values this harness reproduces: human FactScores per
// subject model, per-evaluator (ER, FS) cells, and the per-evaluator
// cumulative |ER|.
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

// Final-comparison score columns for ten subject models: two published
// reference settings and this pipeline's own estimates.
const std::vector<std::string> kModels = {
    "GPT-4",      "ChatGPT",   "Alpaca 65B", "InstructGPT", "Alpaca 13B",
    "Vicuna 7B",  "MPT Chat 7B", "Pythia 12B", "Dolly 12B",  "StableLM 7B"};
const std::vector<double> kFsA = {73.1, 71.6, 55.6, 52.8, 47.7, 38.9, 30.1, 25.1, 21.7, 17.3};
const std::vector<double> kFsB = {59.9, 60.4, 46.3, 41.7, 40.3, 36.9, 27.9, 20.8, 17.1, 16.3};
const std::vector<double> kFsOurs = {50.08, 46.52, 37.14, 35.89, 30.03,
                                     29.05, 20.65, 16.23, 13.45, 9.20};

ScoreVector column(const std::string& label, const std::vector<double>& values) {
  return ScoreVector{label, kModels, values};
}

void out_back_fact(SentenceAnnotation& a, const std::string& text) {
  a.human_facts.push_back(evalharness::HumanFact{text, afv::Label::Supported});
}

std::string fig1_style_record() {
  nlohmann::json record = {
      {"input", "Question: Tell me a bio of Ada Lovelace."},
      {"output", "Ada Lovelace was a mathematician. She was born in 1815."},
      {"topic", "Ada Lovelace"},
      {"annotations",
       nlohmann::json::array(
           {nlohmann::json{
                {"text", "Ada Lovelace was a mathematician."},
                {"is-relevant", true},
                {"human-atomic-facts",
                 nlohmann::json::array(
                     {nlohmann::json{{"text", "Ada Lovelace was a mathematician."},
                                     {"label", "S"}},
                      nlohmann::json{{"text", "Ada Lovelace was a poet."}, {"label", "NS"}}})}},
            nlohmann::json{
                {"text", "She was born in 1815."},
                {"is-relevant", false},
                {"human-atomic-facts",
                 nlohmann::json::array({nlohmann::json{
                     {"text", "She was born in 1815."}, {"label", "IR"}}})}}})},
  };
  return record.dump();
}

}  // namespace

TEST_SUITE("evalharness") {
  TEST_CASE("load_annotations parses the annotation schema") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("ann.jsonl"), fig1_style_record() + "\n");
    evalharness::AnnotationLoadStats stats;
    auto records = evalharness::load_annotations(dir.file("ann.jsonl"), &stats);
    REQUIRE(records.size() == 1);
    CHECK(stats.records == 1);
    CHECK(records[0].topic == "Ada Lovelace");
    REQUIRE(records[0].annotations.size() == 2);
    CHECK(records[0].annotations[0].is_relevant);
    CHECK_FALSE(records[0].annotations[1].is_relevant);
    REQUIRE(records[0].annotations[0].human_facts.size() == 2);
    CHECK(records[0].annotations[0].human_facts[0].label == afv::Label::Supported);
    CHECK(records[0].annotations[0].human_facts[1].label == afv::Label::NotSupported);
    CHECK_FALSE(records[0].annotations[1].human_facts[0].label.has_value());  // "IR"

    SUBCASE("null annotations and malformed lines are tallied, not fatal") {
      testutil::write_file(dir.file("mixed.jsonl"),
                           fig1_style_record() + "\n" +
                               R"({"topic": "X", "annotations": null})" + "\n" +
                               "garbage line\n");
      evalharness::AnnotationLoadStats s;
      auto r = evalharness::load_annotations(dir.file("mixed.jsonl"), &s);
      CHECK(r.size() == 1);
      CHECK(s.skipped_null_annotations == 1);
      CHECK(s.skipped_malformed == 1);
    }
    SUBCASE("case-insensitive label strings") {
      testutil::write_file(
          dir.file("labels.jsonl"),
          R"({"topic": "T", "annotations": [{"text": "s", "is-relevant": true, "human-atomic-facts": [{"text": "f1", "label": "Supported"}, {"text": "f2", "label": "not-supported"}]}]})"
          "\n");
      auto r = evalharness::load_annotations(dir.file("labels.jsonl"));
      CHECK(r[0].annotations[0].human_facts[0].label == afv::Label::Supported);
      CHECK(r[0].annotations[0].human_facts[1].label == afv::Label::NotSupported);
    }
    SUBCASE("empty file errors") {
      testutil::write_file(dir.file("empty.jsonl"), "");
      CHECK_THROWS_AS(evalharness::load_annotations(dir.file("empty.jsonl")), Error);
    }
  }

  TEST_CASE("human_factscore: relevance filter and macro averaging") {
    auto record_with = [](const std::string& topic,
                          const std::vector<afv::Label>& labels) {
      AnnotationRecord r;
      r.topic = topic;
      SentenceAnnotation s;
      s.text = "sentence";
      s.is_relevant = true;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        s.human_facts.push_back({"fact " + std::to_string(i), labels[i]});
      }
      r.annotations.push_back(s);
      return r;
    };
    using afv::Label;

    SUBCASE("one topic, S S NS -> 66.67") {
      std::vector<AnnotationRecord> records = {
          record_with("t", {Label::Supported, Label::Supported, Label::NotSupported})};
      CHECK(evalharness::human_factscore(records) == doctest::Approx(66.6667).epsilon(1e-4));
    }
    SUBCASE("two topics 1.0 and 0.5 -> 75.00") {
      std::vector<AnnotationRecord> records = {
          record_with("a", {Label::Supported, Label::Supported}),
          record_with("b", {Label::Supported, Label::NotSupported})};
      CHECK(evalharness::human_factscore(records) == doctest::Approx(75.0));
    }
    SUBCASE("irrelevant sentences are excluded") {
      auto r = record_with("t", {Label::Supported});
      SentenceAnnotation skipped;
      skipped.text = "skipped";
      skipped.is_relevant = false;
      skipped.human_facts.push_back({"bad fact", afv::Label::NotSupported});
      r.annotations.push_back(skipped);
      std::vector<AnnotationRecord> records = {r};
      CHECK(evalharness::human_factscore(records) == doctest::Approx(100.0));
    }
    SUBCASE("released annotation sets, when present, match the published values") {
      const char* dir = std::getenv("FACTEVAL_ANNOTATIONS_DIR");
      if (dir == nullptr) {
        MESSAGE("FACTEVAL_ANNOTATIONS_DIR unset; skipping external-data check");
        return;
      }
      const std::pair<const char*, double> sets[3] = {
          {"InstructGPT.jsonl", 42.5}, {"ChatGPT.jsonl", 58.3}, {"PerplexityAI.jsonl", 71.5}};
      for (const auto& [file, expected] : sets) {
        auto path = std::filesystem::path(dir) / file;
        if (!std::filesystem::exists(path)) continue;
        auto records = evalharness::load_annotations(path);
        CHECK(evalharness::human_factscore(records) ==
              doctest::Approx(expected).epsilon(0.5 / expected));
      }
    }
  }

  TEST_CASE("error rate and cumulative error rate reproduce the reference table") {
    CHECK(evalharness::error_rate(42.5, 45.3) == doctest::Approx(-2.8));
    CHECK(evalharness::error_rate(58.3, 60.0) == doctest::Approx(-1.7));
    CHECK(evalharness::error_rate(50.0, 50.0) == doctest::Approx(0.0));

    for (const EvalRow& row : kEvalRows) {
      std::vector<double> ers;
      for (int s = 0; s < 3; ++s) {
        double er = evalharness::error_rate(kHumanFs[s], row.fs[s]);
        CHECK(std::fabs(er - row.er[s]) < 0.05);
        ers.push_back(er);
      }
      CHECK(std::fabs(evalharness::cumulative_error_rate(ers) - row.cumulative) < 0.05);
    }

    SUBCASE("cumulative uses absolute values") {
      std::vector<double> ers = {-2.8, 1.6, 9.0};
      CHECK(evalharness::cumulative_error_rate(ers) == doctest::Approx(13.4));
      std::vector<double> olmo = {-24.6, -20.1, -10.9};
      CHECK(evalharness::cumulative_error_rate(olmo) == doctest::Approx(55.6));
      std::vector<double> zeros = {0.0, 0.0, 0.0};
      CHECK(evalharness::cumulative_error_rate(zeros) == doctest::Approx(0.0));
    }
    SUBCASE("antisymmetry") {
      std::mt19937 rng(3);
      std::uniform_real_distribution<double> fs(0.0, 100.0);
      for (int i = 0; i < 100; ++i) {
        double h = fs(rng);
        double e = fs(rng);
        CHECK(evalharness::error_rate(h, e) == doctest::Approx(-evalharness::error_rate(e, h)));
      }
    }
    SUBCASE("cumulative >= max |er|, equal iff single nonzero") {
      std::vector<double> ers = {-3.0, 0.0, 1.0};
      CHECK(evalharness::cumulative_error_rate(ers) >= 3.0);
      std::vector<double> one = {-3.0, 0.0, 0.0};
      CHECK(evalharness::cumulative_error_rate(one) == doctest::Approx(3.0));
    }
  }

  TEST_CASE("token_f1") {
    CHECK(evalharness::token_f1("same string here", "same string here") == doctest::Approx(1.0));
    CHECK(evalharness::token_f1("aaa bbb", "ccc ddd") == doctest::Approx(0.0));
    CHECK(evalharness::token_f1("", "") == doctest::Approx(1.0));
    CHECK(evalharness::token_f1("something", "") == doctest::Approx(0.0));
    // P = 2/3 (candidate has 3 tokens), R = 2/2, F1 = 0.8.
    CHECK(evalharness::token_f1("ada was born", "ada born") == doctest::Approx(0.8));

    SUBCASE("symmetry") {
      std::mt19937 rng(17);
      std::uniform_int_distribution<int> len(0, 8);
      std::uniform_int_distribution<int> word(0, 4);
      const char* vocab[5] = {"ada", "born", "wrote", "poet", "1815"};
      for (int i = 0; i < 200; ++i) {
        auto make = [&] {
          std::string s;
          int n = len(rng);
          for (int j = 0; j < n; ++j) {
            if (!s.empty()) s += ' ';
            s += vocab[word(rng)];
          }
          return s;
        };
        std::string a = make();
        std::string b = make();
        CHECK(evalharness::token_f1(a, b) == doctest::Approx(evalharness::token_f1(b, a)));
      }
    }
    SUBCASE("multiset semantics count repeats") {
      // candidate "a a" vs reference "a": overlap 1, P=1/2, R=1 -> F1=2/3.
      CHECK(evalharness::token_f1("a a", "a") == doctest::Approx(2.0 / 3.0));
    }
  }

  TEST_CASE("greedy_embedding_f1 over scripted vectors") {
    MockBackend::Script script;
    auto unit = [](double x, double y, double z) { return std::vector<double>{x, y, z}; };
    script.embed[backends::embed_digest("ada")] = unit(1, 0, 0);
    script.embed[backends::embed_digest("poet")] = unit(0, 1, 0);
    script.embed[backends::embed_digest("wrote")] = unit(0, 0, 1);
    MockBackend mock(std::move(script));

    SUBCASE("identical strings score 1") {
      CHECK(evalharness::greedy_embedding_f1("ada poet", "ada poet", mock) ==
            doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("orthogonal tokens score 0") {
      CHECK(evalharness::greedy_embedding_f1("ada", "poet", mock) ==
            doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("one shared of two per side scores 0.5") {
      // P = mean(1, 0) = 0.5, R = mean(1, 0) = 0.5, F1 = 0.5.
      CHECK(evalharness::greedy_embedding_f1("ada poet", "ada wrote", mock) ==
            doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("embedding capability required") {
      MockBackend::Options off;
      off.supports_embeddings = false;
      MockBackend no_embed(MockBackend::Script{}, off);
      CHECK_THROWS_AS(evalharness::greedy_embedding_f1("a", "b", no_embed), CapabilityError);
    }
  }

  TEST_CASE("afg_best_match") {
    auto factset_with = [](const std::vector<std::vector<std::string>>& sentence_facts) {
      afg::FactSet fs;
      fs.topic = "T";
      for (std::size_t s = 0; s < sentence_facts.size(); ++s) {
        afg::SentenceFacts sf;
        sf.sentence = afg::Sentence{"sentence " + std::to_string(s), s};
        for (std::size_t f = 0; f < sentence_facts[s].size(); ++f) {
          sf.facts.push_back(afg::AtomicFact{sentence_facts[s][f], s, f});
        }
        fs.sentences.push_back(sf);
      }
      return fs;
    };
    auto annotation_with = [](const std::vector<std::vector<std::string>>& sentence_facts) {
      std::vector<SentenceAnnotation> out;
      for (std::size_t s = 0; s < sentence_facts.size(); ++s) {
        SentenceAnnotation a;
        a.text = "sentence " + std::to_string(s);
        for (const std::string& f : sentence_facts[s]) out_back_fact(a, f);
        out.push_back(a);
      }
      return out;
    };

    auto scorer = [](std::string_view a, std::string_view b) {
      return evalharness::token_f1(a, b);
    };

    SUBCASE("identical facts score 1") {
      auto fs = factset_with({{"ada was born", "ada wrote"}, {"ada died"}});
      auto ann = annotation_with({{"ada was born", "ada wrote"}, {"ada died"}});
      auto result = evalharness::afg_best_match(fs, ann, scorer);
      CHECK(result.mean_best == doctest::Approx(1.0));
      CHECK(result.facts_scored == 3);
    }
    SUBCASE("max semantics: one exact match among three human facts") {
      auto fs = factset_with({{"ada was born"}});
      auto ann = annotation_with({{"zzz qqq", "ada was born", "vvv www"}});
      auto result = evalharness::afg_best_match(fs, ann, scorer);
      CHECK(result.mean_best == doctest::Approx(1.0));
    }
    SUBCASE("order of human facts is irrelevant; adding one never lowers the score") {
      auto fs = factset_with({{"ada was born", "ada wrote programs"}});
      auto ann1 = annotation_with({{"ada was born", "other text"}});
      auto ann2 = annotation_with({{"other text", "ada was born"}});
      auto r1 = evalharness::afg_best_match(fs, ann1, scorer);
      auto r2 = evalharness::afg_best_match(fs, ann2, scorer);
      CHECK(r1.mean_best == doctest::Approx(r2.mean_best));

      auto ann3 = annotation_with({{"other text", "ada was born", "ada wrote programs"}});
      auto r3 = evalharness::afg_best_match(fs, ann3, scorer);
      CHECK(r3.mean_best >= r1.mean_best - 1e-12);
    }
    SUBCASE("mismatched counts fall back to exact text alignment") {
      auto fs = factset_with({{"ada was born"}});
      std::vector<SentenceAnnotation> ann;
      SentenceAnnotation other;
      other.text = "unrelated";
      out_back_fact(other, "x");
      ann.push_back(other);
      SentenceAnnotation matching;
      matching.text = "sentence 0";
      out_back_fact(matching, "ada was born");
      ann.push_back(matching);
      auto result = evalharness::afg_best_match(fs, ann, scorer);
      CHECK(result.mean_best == doctest::Approx(1.0));
      CHECK(result.sentences_aligned == 1);
    }
    SUBCASE("nothing aligns -> error") {
      auto fs = factset_with({{"fact"}});
      std::vector<SentenceAnnotation> ann;
      SentenceAnnotation a;
      a.text = "completely different";
      out_back_fact(a, "x");
      ann.push_back(a);
      ann.push_back(a);
      CHECK_THROWS_AS(evalharness::afg_best_match(fs, ann, scorer), Error);
    }
    SUBCASE("per-sentence max mode collapses each sentence to its best pair") {
      // One sentence, facts scoring 1.0 and 0.0: per-fact mean 0.5,
      // per-sentence max 1.0.
      auto fs = factset_with({{"ada was born", "zzz qqq"}});
      auto ann = annotation_with({{"ada was born"}});
      auto per_fact = evalharness::afg_best_match(fs, ann, scorer);
      CHECK(per_fact.mean_best == doctest::Approx(0.5));

      evalharness::BestMatchOptions options;
      options.per_sentence_max = true;
      auto per_sentence = evalharness::afg_best_match(fs, ann, scorer, options);
      CHECK(per_sentence.mean_best == doctest::Approx(1.0));
    }
  }

  TEST_CASE("pearson and spearman") {
    SUBCASE("perfect linear relations") {
      std::vector<double> x = {1, 2, 3, 4, 5};
      std::vector<double> y = {5, 7, 9, 11, 13};  // 2x + 3
      CHECK(evalharness::pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
      std::vector<double> neg = {-1, -2, -3, -4, -5};
      CHECK(evalharness::pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("zero variance errors") {
      std::vector<double> x = {1, 2, 3};
      std::vector<double> flat = {4, 4, 4};
      CHECK_THROWS_AS(evalharness::pearson(x, flat), Error);
    }
    SUBCASE("n < 2 errors") {
      std::vector<double> x = {1};
      CHECK_THROWS_AS(evalharness::pearson(x, x), Error);
    }
    SUBCASE("monotone transform gives spearman 1, reversal -1") {
      std::vector<double> x = {1, 5, 3, 4, 2};
      std::vector<double> cubed;
      for (double v : x) cubed.push_back(v * v * v);
      CHECK(evalharness::spearman_rank(x, cubed) == doctest::Approx(1.0));
      std::vector<double> reversed;
      for (double v : x) reversed.push_back(-v);
      CHECK(evalharness::spearman_rank(x, reversed) == doctest::Approx(-1.0));
    }
    SUBCASE("ties get average ranks") {
      std::vector<double> values = {10, 20, 20, 30};
      auto ranks = evalharness::average_ranks(values);
      CHECK(ranks[0] == doctest::Approx(1.0));
      CHECK(ranks[1] == doctest::Approx(2.5));
      CHECK(ranks[2] == doctest::Approx(2.5));
      CHECK(ranks[3] == doctest::Approx(4.0));
    }
    SUBCASE("affine invariance to 1e-12") {
      std::vector<double> x = {3.1, 1.2, 8.9, 4.4, 6.0, 2.2};
      std::vector<double> y = {1.0, 0.4, 2.2, 1.8, 2.0, 0.9};
      double base = evalharness::pearson(x, y);
      std::vector<double> scaled;
      for (double v : x) scaled.push_back(2.5 * v + 17.0);
      CHECK(evalharness::pearson(scaled, y) == doctest::Approx(base).epsilon(1e-12));
      CHECK(evalharness::spearman_rank(scaled, y) ==
            doctest::Approx(evalharness::spearman_rank(x, y)).epsilon(1e-12));
    }
  }

  TEST_CASE("reference score columns correlate as published") {
    auto a = column("FS (A)", kFsA);
    auto b = column("FS (B)", kFsB);
    auto ours = column("FS (OFS)", kFsOurs);

    CHECK(evalharness::pearson(a, ours) > 0.99);
    CHECK(evalharness::pearson(b, ours) > 0.99);
    CHECK(evalharness::spearman_rank(a, ours) == doctest::Approx(1.0));

    SUBCASE("alignment is by name, not position") {
      ScoreVector shuffled = ours;
      std::swap(shuffled.names[0], shuffled.names[9]);
      std::swap(shuffled.values[0], shuffled.values[9]);
      CHECK(evalharness::pearson(a, shuffled) == doctest::Approx(evalharness::pearson(a, ours)));
    }
    SUBCASE("mismatched label sets error") {
      ScoreVector wrong = ours;
      wrong.names[0] = "Some Other Model";
      CHECK_THROWS_AS(evalharness::pearson(a, wrong), Error);
    }
  }

  TEST_CASE("er table rendering") {
    std::vector<evalharness::ErCell> cells = {
        {"Llama3.1", "InstructGPT", 42.5, 45.3, -2.8},
        {"Llama3.1", "ChatGPT", 58.3, 56.7, 1.6},
    };
    std::string table = evalharness::render_er_table(cells);
    CHECK(table.find("Llama3.1") != std::string::npos);
    CHECK(table.find("4.4") != std::string::npos);  // cumulative |ER| = 2.8 + 1.6
  }
}
