#include <algorithm>
#include <random>

#include "doctest.h"

#include "facteval/errors.hpp"
#include "facteval/scoring.hpp"

using namespace facteval;
using afv::Label;
using afv::Verdict;
using scoring::TopicReport;

namespace {

std::vector<Verdict> verdicts_from(const std::vector<Label>& labels) {
  std::vector<Verdict> out;
  for (Label l : labels) {
    Verdict v;
    v.label = l;
    out.push_back(v);
  }
  return out;
}

constexpr Label S = Label::Supported;
constexpr Label NS = Label::NotSupported;

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("topic factscore = supported / total") {
    auto report = scoring::topic_factscore("t", verdicts_from({S, NS, S, S, NS}));
    CHECK(report.num_facts == 5);
    CHECK(report.num_supported == 3);
    REQUIRE(report.factscore.has_value());
    CHECK(*report.factscore == doctest::Approx(0.6));

    CHECK_FALSE(scoring::topic_factscore("t", {}).factscore.has_value());
    CHECK(*scoring::topic_factscore("t", verdicts_from({S, S})).factscore == doctest::Approx(1.0));
  }

  TEST_CASE("aggregate: macro mean, respond ratio, percent rendering") {
    std::vector<TopicReport> reports;
    reports.push_back(scoring::topic_factscore("a", verdicts_from({S})));        // 1.0
    reports.push_back(scoring::topic_factscore("b", verdicts_from({NS, NS})));   // 0.0
    auto run = scoring::aggregate(reports, "model");
    CHECK(run.factscore == doctest::Approx(0.5));
    CHECK(scoring::to_percent(run.factscore) == doctest::Approx(50.00));
    CHECK(run.respond_ratio == doctest::Approx(1.0));

    SUBCASE("single topic renders x100 with 2 decimals") {
      auto one = scoring::aggregate({scoring::topic_factscore("t", verdicts_from({S, S, S, NS, NS}))},
                                    "m");
      CHECK(scoring::to_percent(one.factscore) == doctest::Approx(60.00));
    }

    SUBCASE("abstained topics lower respond_ratio but not the mean") {
      std::vector<TopicReport> rs;
      for (int i = 0; i < 8; ++i) {
        rs.push_back(scoring::topic_factscore("t" + std::to_string(i), verdicts_from({S})));
      }
      for (int i = 0; i < 2; ++i) {
        TopicReport abstained;
        abstained.topic = "a" + std::to_string(i);
        abstained.abstained = true;
        rs.push_back(abstained);
      }
      auto r = scoring::aggregate(rs, "m");
      CHECK(r.respond_ratio == doctest::Approx(0.8));
      CHECK(r.factscore == doctest::Approx(1.0));
    }

    SUBCASE("zero defined topics errors") {
      TopicReport empty;
      empty.topic = "nothing";
      CHECK_THROWS_AS(scoring::aggregate({empty}, "m"), Error);
    }
  }

  TEST_CASE("macro vs micro is observable: sizes 1 and 9") {
    std::vector<TopicReport> reports;
    reports.push_back(scoring::topic_factscore("small", verdicts_from({S})));
    reports.push_back(scoring::topic_factscore(
        "large", verdicts_from({NS, NS, NS, NS, NS, NS, NS, NS, NS})));
    auto run = scoring::aggregate(reports, "m");
    CHECK(run.factscore == doctest::Approx(0.5));  // macro

    std::size_t supported = 0;
    std::size_t total = 0;
    for (const auto& r : run.topic_reports) {
      supported += r.num_supported;
      total += r.num_facts;
    }
    double micro = static_cast<double>(supported) / static_cast<double>(total);
    CHECK(micro == doctest::Approx(0.1));  // and micro would differ
  }

  TEST_CASE("permutation of topics never changes the aggregate") {
    std::vector<TopicReport> reports;
    reports.push_back(scoring::topic_factscore("a", verdicts_from({S, NS})));
    reports.push_back(scoring::topic_factscore("b", verdicts_from({S, S, S})));
    reports.push_back(scoring::topic_factscore("c", verdicts_from({NS})));
    TopicReport abstained;
    abstained.topic = "d";
    abstained.abstained = true;
    reports.push_back(abstained);

    auto base = scoring::aggregate(reports, "m");
    std::mt19937 rng(5);
    for (int i = 0; i < 10; ++i) {
      std::shuffle(reports.begin(), reports.end(), rng);
      auto shuffled = scoring::aggregate(reports, "m");
      CHECK(shuffled.factscore == base.factscore);
      CHECK(shuffled.respond_ratio == base.respond_ratio);
      CHECK(shuffled.avg_facts_per_response == base.avg_facts_per_response);
      CHECK(shuffled.total_failures == base.total_failures);
    }
  }

  TEST_CASE("validated facts: failures leave numerator and denominator") {
    std::vector<afv::ValidatedFact> facts(3);
    facts[0].fact_text = "a";
    Verdict v;
    v.label = S;
    facts[0].verdict = v;
    facts[1].fact_text = "b";
    facts[1].error = "boom";
    facts[2].fact_text = "c";
    Verdict v2;
    v2.label = NS;
    facts[2].verdict = v2;

    auto report = scoring::topic_report_from_validated("t", facts, false);
    CHECK(report.num_facts == 2);
    CHECK(report.num_supported == 1);
    CHECK(report.failures == 1);
    CHECK(*report.factscore == doctest::Approx(0.5));
  }

  TEST_CASE("factscore bounds hold") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> count(1, 20);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Label> labels;
      int n = count(rng);
      for (int i = 0; i < n; ++i) labels.push_back(coin(rng) ? S : NS);
      auto report = scoring::topic_factscore("t", verdicts_from(labels));
      REQUIRE(report.factscore.has_value());
      CHECK(*report.factscore >= 0.0);
      CHECK(*report.factscore <= 1.0);
      CHECK(report.num_supported <= report.num_facts);
    }
  }

  TEST_CASE("penalty hook ships disabled and can be installed") {
    std::vector<TopicReport> reports;
    reports.push_back(scoring::topic_factscore("tiny", verdicts_from({S})));  // 1 fact
    reports.push_back(scoring::topic_factscore("big", verdicts_from({S, S, S, S})));

    auto plain = scoring::aggregate(reports, "m");
    CHECK(plain.factscore == doctest::Approx(1.0));  // no penalty by default

    // Example penalty: halve the score of topics with fewer than 2 facts.
    auto penalized = scoring::aggregate(reports, "m", [](const TopicReport& r, double score) {
      return r.num_facts < 2 ? score * 0.5 : score;
    });
    CHECK(penalized.factscore == doctest::Approx(0.75));
  }

  TEST_CASE("report json and table rendering") {
    std::vector<TopicReport> reports = {scoring::topic_factscore("ada", verdicts_from({S, NS}))};
    auto run = scoring::aggregate(reports, "subject-model");
    auto j = scoring::to_json(run);
    CHECK(j["model_name"] == "subject-model");
    CHECK(j["factscore_pct"].get<double>() == doctest::Approx(50.0));
    CHECK(j["per_topic"].size() == 1);

    std::string table = scoring::render_table(run);
    CHECK(table.find("subject-model") != std::string::npos);
    CHECK(table.find("50.00") != std::string::npos);
  }
}
