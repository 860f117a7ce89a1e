#pragma once

#include <filesystem>
#include <memory>
#include <mutex>

#include "json.hpp"

#include "facteval/backends.hpp"

namespace facteval::backends {

/// Chat-completions-shaped HTTP client. Timeouts and 429/5xx responses are
/// retried with exponential backoff (factor 2, jittered) up to max_retries,
/// then surface as TransportError; other non-2xx statuses raise
/// ProtocolError with the status and a body excerpt. Requests and responses
/// can be mirrored to a line-delimited trace file in the mock-script format,
/// so a recorded run replays offline.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;

  std::string name() const override { return config_.model_name; }
  const BackendConfig& config() const { return config_; }

  /// Mirror every response to this file ({digest, kind, response} JSONL).
  void set_trace_file(const std::filesystem::path& path);

 protected:
  std::string do_chat(std::span<const ChatMessage> messages, const GenerationParams& params,
                      RequestLogEntry& log) override;
  std::vector<double> do_score_candidates(std::span<const ChatMessage> messages,
                                          std::span<const std::string> candidates,
                                          RequestLogEntry& log) override;
  std::vector<std::vector<double>> do_embed(std::span<const std::string> texts,
                                            RequestLogEntry& log) override;

 private:
  struct Impl;

  std::string post_with_retry(const std::string& path, const std::string& body,
                              RequestLogEntry& log);
  void trace(const std::string& digest, const std::string& kind, const nlohmann::json& response);

  BackendConfig config_;
  std::unique_ptr<Impl> impl_;
  std::filesystem::path trace_path_;
  std::mutex trace_mutex_;
};

}  // namespace facteval::backends
