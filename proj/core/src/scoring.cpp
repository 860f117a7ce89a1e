#include "facteval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "facteval/errors.hpp"
#include "facteval/io/binary.hpp"

namespace facteval::scoring {

namespace {

std::string format2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

double to_percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

TopicReport topic_factscore(std::string topic, std::span<const afv::Verdict> verdicts) {
  TopicReport report;
  report.topic = std::move(topic);
  report.num_facts = verdicts.size();
  for (const afv::Verdict& v : verdicts) {
    if (v.label == afv::Label::Supported) ++report.num_supported;
  }
  if (report.num_facts > 0) {
    report.factscore = static_cast<double>(report.num_supported) /
                       static_cast<double>(report.num_facts);
  }
  return report;
}

TopicReport topic_report_from_validated(std::string topic,
                                        std::span<const afv::ValidatedFact> facts,
                                        bool abstained, std::size_t extra_failures) {
  TopicReport report;
  report.topic = std::move(topic);
  report.abstained = abstained;
  report.failures = extra_failures;
  if (abstained) return report;

  for (const afv::ValidatedFact& vf : facts) {
    if (vf.failed()) {
      ++report.failures;
      continue;
    }
    ++report.num_facts;
    if (vf.verdict->label == afv::Label::Supported) ++report.num_supported;
  }
  if (report.num_facts > 0) {
    report.factscore = static_cast<double>(report.num_supported) /
                       static_cast<double>(report.num_facts);
  }
  return report;
}

RunReport aggregate(std::vector<TopicReport> reports, std::string model_name,
                    const TopicScorePenalty& penalty) {
  RunReport run;
  run.model_name = std::move(model_name);

  double sum = 0.0;
  std::size_t defined = 0;
  std::size_t responded = 0;
  std::size_t total_facts = 0;
  for (const TopicReport& r : reports) {
    if (!r.abstained) {
      ++responded;
      total_facts += r.num_facts;
    }
    run.total_failures += r.failures;
    if (r.factscore) {
      sum += penalty ? penalty(r, *r.factscore) : *r.factscore;
      ++defined;
    }
  }
  if (defined == 0) throw Error("aggregate: no topic has a defined factscore");

  run.factscore = sum / static_cast<double>(defined);
  run.respond_ratio = reports.empty()
                          ? 0.0
                          : static_cast<double>(responded) / static_cast<double>(reports.size());
  run.avg_facts_per_response =
      responded == 0 ? 0.0 : static_cast<double>(total_facts) / static_cast<double>(responded);
  run.topic_reports = std::move(reports);
  return run;
}

std::string render_table(const RunReport& report) {
  std::string out;
  out += "model: " + report.model_name + "\n";
  out += "topic                            facts  supported  factscore\n";
  out += "-----                            -----  ---------  ---------\n";
  for (const TopicReport& r : report.topic_reports) {
    char line[160];
    std::string score = r.abstained        ? "abstained"
                        : r.factscore      ? format2(to_percent(*r.factscore))
                                           : "undefined";
    std::snprintf(line, sizeof(line), "%-32s %5zu  %9zu  %9s\n", r.topic.c_str(), r.num_facts,
                  r.num_supported, score.c_str());
    out += line;
  }
  out += "\n";
  out += "factscore:              " + format2(to_percent(report.factscore)) + "\n";
  out += "respond_ratio:          " + format2(report.respond_ratio) + "\n";
  out += "avg_facts_per_response: " + format2(report.avg_facts_per_response) + "\n";
  out += "total_failures:         " + std::to_string(report.total_failures) + "\n";
  return out;
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json per_topic = nlohmann::json::array();
  for (const TopicReport& r : report.topic_reports) {
    nlohmann::json t = {
        {"topic", r.topic},           {"num_facts", r.num_facts},
        {"num_supported", r.num_supported}, {"abstained", r.abstained},
        {"failures", r.failures},
    };
    if (r.factscore) {
      t["factscore_pct"] = to_percent(*r.factscore);
    } else {
      t["factscore_pct"] = nullptr;
    }
    per_topic.push_back(std::move(t));
  }
  return {
      {"model_name", report.model_name},
      {"factscore_pct", to_percent(report.factscore)},
      {"respond_ratio", report.respond_ratio},
      {"avg_facts_per_response", report.avg_facts_per_response},
      {"total_failures", report.total_failures},
      {"per_topic", std::move(per_topic)},
  };
}

void write_run_report(const std::filesystem::path& path, const RunReport& report) {
  io::atomic_write_file(path, to_json(report).dump(2) + "\n");
}

}  // namespace facteval::scoring
