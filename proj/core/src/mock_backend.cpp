#include "facteval/mock_backend.hpp"

#include <algorithm>

#include "facteval/errors.hpp"
#include "facteval/io/jsonl.hpp"
#include "facteval/util/hash.hpp"

namespace facteval::backends {

class MockBackend::InFlight {
 public:
  InFlight(std::atomic<int>& count, std::atomic<int>& high_water) : count_(count) {
    int now = count_.fetch_add(1) + 1;
    int seen = high_water.load();
    while (now > seen && !high_water.compare_exchange_weak(seen, now)) {
    }
  }
  ~InFlight() { count_.fetch_sub(1); }

 private:
  std::atomic<int>& count_;
};

MockBackend::MockBackend(Script script) : MockBackend(std::move(script), Options{}) {}

MockBackend::MockBackend(Script script, Options options)
    : Backend(options.parallelism), script_(std::move(script)), options_(options) {}

std::string MockBackend::do_chat(std::span<const ChatMessage>, const GenerationParams&,
                                 RequestLogEntry& log) {
  InFlight guard(in_flight_, max_in_flight_);
  auto it = script_.chat.find(log.digest);
  if (it == script_.chat.end()) {
    throw MockScriptMiss("mock script has no chat entry for digest " + log.digest);
  }
  return it->second;
}

std::vector<double> MockBackend::do_score_candidates(std::span<const ChatMessage>,
                                                     std::span<const std::string> candidates,
                                                     RequestLogEntry& log) {
  InFlight guard(in_flight_, max_in_flight_);
  if (!options_.supports_logprobs) {
    throw CapabilityError("mock backend configured without logprob support");
  }
  auto it = script_.logprob.find(log.digest);
  if (it == script_.logprob.end()) {
    throw MockScriptMiss("mock script has no logprob entry for digest " + log.digest);
  }
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const std::string& candidate : candidates) {
    auto cit = it->second.find(candidate);
    if (cit == it->second.end()) {
      throw MockScriptMiss("mock logprob entry " + log.digest + " lacks candidate \"" +
                           candidate + "\"");
    }
    out.push_back(cit->second);
  }
  return out;
}

std::vector<double> MockBackend::hash_embedding(std::string_view text) const {
  std::vector<double> v(options_.hash_embedding_dim, 0.0);
  v[hash::fnv1a64(text) % options_.hash_embedding_dim] = 1.0;
  return v;
}

std::vector<std::vector<double>> MockBackend::do_embed(std::span<const std::string> texts,
                                                       RequestLogEntry&) {
  InFlight guard(in_flight_, max_in_flight_);
  if (!options_.supports_embeddings) {
    throw CapabilityError("mock backend configured without embedding support");
  }
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) {
    auto it = script_.embed.find(embed_digest(t));
    if (it != script_.embed.end()) {
      out.push_back(it->second);
    } else if (options_.hash_embedding_dim > 0) {
      out.push_back(hash_embedding(t));
    } else {
      throw MockScriptMiss("mock script has no embed entry for digest " + embed_digest(t));
    }
  }
  return out;
}

MockBackend::Script MockBackend::load_script(const std::filesystem::path& path) {
  Script script;
  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& record) {
    if (!record.contains("digest") || !record.contains("kind") || !record.contains("response")) {
      throw ConfigError("mock script " + path.string() + " line " + std::to_string(line) +
                        ": need digest/kind/response");
    }
    std::string digest = record["digest"].get<std::string>();
    std::string kind = record["kind"].get<std::string>();
    const nlohmann::json& response = record["response"];
    if (kind == "chat") {
      script.chat[digest] = response.get<std::string>();
    } else if (kind == "logprob") {
      script.logprob[digest] = response.get<std::map<std::string, double>>();
    } else if (kind == "embed") {
      script.embed[digest] = response.get<std::vector<double>>();
    } else {
      throw ConfigError("mock script " + path.string() + " line " + std::to_string(line) +
                        ": unknown kind " + kind);
    }
  });
  return script;
}

void MockBackend::save_script(const std::filesystem::path& path, const Script& script) {
  std::vector<nlohmann::json> records;
  for (const auto& [digest, response] : script.chat) {
    records.push_back({{"digest", digest}, {"kind", "chat"}, {"response", response}});
  }
  for (const auto& [digest, response] : script.logprob) {
    records.push_back({{"digest", digest}, {"kind", "logprob"}, {"response", response}});
  }
  for (const auto& [digest, response] : script.embed) {
    records.push_back({{"digest", digest}, {"kind", "embed"}, {"response", response}});
  }
  std::sort(records.begin(), records.end(), [](const nlohmann::json& a, const nlohmann::json& b) {
    auto key = [](const nlohmann::json& r) {
      return r["kind"].get<std::string>() + ":" + r["digest"].get<std::string>();
    };
    return key(a) < key(b);
  });
  io::write_jsonl(path, records);
}

}  // namespace facteval::backends
