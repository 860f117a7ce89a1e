#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <unordered_map>

#include "facteval/backends.hpp"

namespace facteval::backends {

/// Deterministic, scriptable backend: a pure function of its script and the
/// request digest. Unscripted digests raise MockScriptMiss with the digest in
/// the message, so a missing fixture is diagnosable rather than silent.
///
/// Script file: one JSON record per line, {"digest": ..., "kind":
/// "chat"|"logprob"|"embed", "response": ...}. Chat responses are strings,
/// logprob responses map candidate -> logprob, embed responses are number
/// arrays. The same format is what HttpBackend writes as its trace, so a
/// trace replays as a script.
class MockBackend final : public Backend {
 public:
  struct Script {
    std::unordered_map<std::string, std::string> chat;
    std::unordered_map<std::string, std::map<std::string, double>> logprob;
    std::unordered_map<std::string, std::vector<double>> embed;
  };

  struct Options {
    int parallelism = 4;
    bool supports_logprobs = true;
    bool supports_embeddings = true;
    /// When > 0 and a text is unscripted, embed falls back to a deterministic
    /// one-hot vector of this dimension (basis index = hash of the text), so
    /// distinct tokens get orthogonal embeddings without scripting.
    std::size_t hash_embedding_dim = 0;
  };

  explicit MockBackend(Script script);
  MockBackend(Script script, Options options);

  std::string name() const override { return "mock"; }

  static Script load_script(const std::filesystem::path& path);
  static void save_script(const std::filesystem::path& path, const Script& script);

  /// High-water mark of concurrent in-flight requests (test instrumentation).
  int max_in_flight() const { return max_in_flight_.load(); }

 protected:
  std::string do_chat(std::span<const ChatMessage> messages, const GenerationParams& params,
                      RequestLogEntry& log) override;
  std::vector<double> do_score_candidates(std::span<const ChatMessage> messages,
                                          std::span<const std::string> candidates,
                                          RequestLogEntry& log) override;
  std::vector<std::vector<double>> do_embed(std::span<const std::string> texts,
                                            RequestLogEntry& log) override;

 private:
  class InFlight;
  std::vector<double> hash_embedding(std::string_view text) const;

  Script script_;
  Options options_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

}  // namespace facteval::backends
