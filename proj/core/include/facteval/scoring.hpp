#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "facteval/afv.hpp"

namespace facteval::scoring {

struct TopicReport {
  std::string topic;
  std::size_t num_facts = 0;
  std::size_t num_supported = 0;
  std::optional<double> factscore;  // absent when num_facts == 0 or abstained
  bool abstained = false;
  std::size_t failures = 0;  // AFG sentence failures + AFV fact failures
};

struct RunReport {
  std::string model_name;
  std::vector<TopicReport> topic_reports;
  double factscore = 0.0;      // macro mean over defined topic scores, in [0,1]
  double respond_ratio = 0.0;  // non-abstained fraction of topics
  double avg_facts_per_response = 0.0;
  std::size_t total_failures = 0;
};

/// supported / total over one topic's verdicts; empty input leaves the score
/// undefined (such topics are excluded from aggregation).
TopicReport topic_factscore(std::string topic, std::span<const afv::Verdict> verdicts);

/// Same, over validated facts: failures are excluded from both numerator and
/// denominator and counted separately.
TopicReport topic_report_from_validated(std::string topic,
                                        std::span<const afv::ValidatedFact> facts,
                                        bool abstained, std::size_t extra_failures = 0);

/// Optional per-topic score adjustment (e.g. a short-response penalty).
/// Receives the topic report and its raw score, returns the adjusted score.
/// Ships disabled: no penalty is applied unless a caller installs one.
using TopicScorePenalty = std::function<double(const TopicReport&, double)>;

/// Macro (unweighted) mean over topics with a defined score. Throws Error
/// when no topic has one.
RunReport aggregate(std::vector<TopicReport> reports, std::string model_name,
                    const TopicScorePenalty& penalty = {});

/// Percentage rendering used everywhere scores are serialized: x100, 2 decimals.
double to_percent(double fraction);

std::string render_table(const RunReport& report);

nlohmann::json to_json(const RunReport& report);
void write_run_report(const std::filesystem::path& path, const RunReport& report);

}  // namespace facteval::scoring
