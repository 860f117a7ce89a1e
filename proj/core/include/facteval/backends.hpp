#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facteval::backends {

enum class Role { system, user, assistant };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct GenerationParams {
  int max_new_tokens = 128;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
};

struct BackendConfig {
  std::string endpoint_url;  // scheme://host[:port]
  std::string model_name;
  std::string api_key_env;  // env var holding the key; empty = unauthenticated
  double timeout_seconds = 30.0;
  int max_retries = 3;
  int parallelism = 1;
  double backoff_base_seconds = 1.0;  // exponential, factor 2, jittered
  std::string chat_path = "/v1/chat/completions";
  std::string completions_path = "/v1/completions";
  std::string embeddings_path = "/v1/embeddings";
  std::string completion_extra_json;  // merged into logprob request bodies
};

struct RequestLogEntry {
  std::string kind;  // chat | logprob | embed
  std::string digest;
  int retries = 0;
  double latency_ms = 0.0;
  int status = 0;  // HTTP status; 0 for non-HTTP backends
};

/// Thread-safe append-only request log.
class RunLog {
 public:
  void append(RequestLogEntry entry);
  std::vector<RequestLogEntry> snapshot() const;
  std::size_t total_retries() const;

 private:
  mutable std::mutex mutex_;
  std::vector<RequestLogEntry> entries_;
};

/// Canonical request digests: FNV-1a over role/content pairs (plus params
/// for chat), rendered as 16 hex digits. Stable across runs and platforms.
std::string chat_digest(std::span<const ChatMessage> messages, const GenerationParams& params);
std::string logprob_digest(std::span<const ChatMessage> messages);
std::string embed_digest(std::string_view input_text);

/// Model inference over a uniform surface. Public entry points validate
/// message invariants, bound in-flight requests to `parallelism`, and append
/// to the run log; subclasses implement the transport.
class Backend {
 public:
  explicit Backend(int parallelism);
  virtual ~Backend() = default;

  virtual std::string name() const = 0;

  /// Assistant text for the conversation. Messages travel verbatim, in
  /// order; chat-template application is the serving side's concern.
  std::string chat(std::span<const ChatMessage> messages, const GenerationParams& params);

  /// log P(candidate | prompt) per candidate, summed over candidate tokens.
  /// Throws CapabilityError when the backend cannot score continuations.
  std::vector<double> score_candidates(std::span<const ChatMessage> messages,
                                       std::span<const std::string> candidates);

  /// One L2-normalized vector per text, uniform dimension. Throws
  /// CapabilityError when the backend has no embedding surface.
  std::vector<std::vector<double>> embed(std::span<const std::string> texts);

  const RunLog& run_log() const { return run_log_; }
  int parallelism() const { return parallelism_; }

 protected:
  virtual std::string do_chat(std::span<const ChatMessage> messages,
                              const GenerationParams& params, RequestLogEntry& log) = 0;
  virtual std::vector<double> do_score_candidates(std::span<const ChatMessage> messages,
                                                  std::span<const std::string> candidates,
                                                  RequestLogEntry& log) = 0;
  virtual std::vector<std::vector<double>> do_embed(std::span<const std::string> texts,
                                                    RequestLogEntry& log) = 0;

 private:
  int parallelism_;
  std::counting_semaphore<4096> slots_;
  RunLog run_log_;
};

}  // namespace facteval::backends
