#include "facteval/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "facteval/errors.hpp"

namespace facteval::backends {

using nlohmann::json;

struct HttpBackend::Impl {
  std::string base_url;  // scheme://host[:port]
};

namespace {

std::string body_excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

double jitter_factor() {
  thread_local std::mt19937_64 rng(std::random_device{}());
  return std::uniform_real_distribution<double>(0.5, 1.5)(rng);
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

json messages_to_json(std::span<const ChatMessage> messages) {
  json arr = json::array();
  for (const ChatMessage& m : messages) {
    arr.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
  }
  return arr;
}

std::string flatten_messages(std::span<const ChatMessage> messages) {
  std::string out;
  for (const ChatMessage& m : messages) {
    if (!out.empty()) out.push_back('\n');
    out += m.content;
  }
  return out;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config)
    : Backend(config.parallelism), config_(std::move(config)), impl_(new Impl) {
  impl_->base_url = config_.endpoint_url;
  while (!impl_->base_url.empty() && impl_->base_url.back() == '/') impl_->base_url.pop_back();
}

HttpBackend::~HttpBackend() = default;

void HttpBackend::set_trace_file(const std::filesystem::path& path) { trace_path_ = path; }

void HttpBackend::trace(const std::string& digest, const std::string& kind,
                        const json& response) {
  if (trace_path_.empty()) return;
  std::lock_guard lock(trace_mutex_);
  std::ofstream out(trace_path_, std::ios::app);
  out << json{{"digest", digest}, {"kind", kind}, {"response", response}}.dump() << '\n';
}

std::string HttpBackend::post_with_retry(const std::string& path, const std::string& body,
                                         RequestLogEntry& log) {
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      double delay = config_.backoff_base_seconds * std::pow(2.0, attempt - 1) * jitter_factor();
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      ++log.retries;
    }

    httplib::Client client(impl_->base_url);
    client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
      if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }

    httplib::Result result = client.Post(path, headers, body, "application/json");
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    log.status = result->status;
    if (result->status >= 200 && result->status < 300) {
      return result->body;
    }
    if (retryable_status(result->status)) {
      last_error = "status " + std::to_string(result->status);
      continue;
    }
    throw ProtocolError(result->status, body_excerpt(result->body));
  }
  throw TransportError("request to " + impl_->base_url + path + " failed after " +
                       std::to_string(config_.max_retries) + " retries: " + last_error);
}

std::string HttpBackend::do_chat(std::span<const ChatMessage> messages,
                                 const GenerationParams& params, RequestLogEntry& log) {
  json body = {
      {"model", config_.model_name},
      {"messages", messages_to_json(messages)},
      {"max_tokens", params.max_new_tokens},
      {"temperature", params.temperature},
  };
  if (params.seed) body["seed"] = *params.seed;

  std::string raw = post_with_retry(config_.chat_path, body.dump(), log);
  json response = json::parse(raw, nullptr, false);
  if (response.is_discarded() || !response.contains("choices") || response["choices"].empty()) {
    throw ProtocolError(log.status, "malformed chat response: " + body_excerpt(raw));
  }
  const json& choice = response["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content")) {
    throw ProtocolError(log.status, "chat response lacks message.content");
  }
  std::string content = choice["message"]["content"].is_null()
                            ? std::string()
                            : choice["message"]["content"].get<std::string>();
  trace(log.digest, "chat", content);
  return content;
}

std::vector<double> HttpBackend::do_score_candidates(std::span<const ChatMessage> messages,
                                                     std::span<const std::string> candidates,
                                                     RequestLogEntry& log) {
  // Legacy completions echo trick: ask for 0 new tokens with echoed prompt
  // logprobs, then sum the token logprobs that fall inside the candidate
  // suffix (by text offset).
  std::string prompt = flatten_messages(messages);
  std::vector<double> out;
  std::map<std::string, double> scripted;
  for (const std::string& candidate : candidates) {
    json body = {
        {"model", config_.model_name}, {"prompt", prompt + candidate},
        {"max_tokens", 0},             {"echo", true},
        {"logprobs", 0},               {"temperature", 0.0},
    };
    if (!config_.completion_extra_json.empty()) {
      json extra = json::parse(config_.completion_extra_json, nullptr, false);
      if (extra.is_object()) {
        for (auto& [k, v] : extra.items()) body[k] = v;
      }
    }

    std::string raw = post_with_retry(config_.completions_path, body.dump(), log);
    json response = json::parse(raw, nullptr, false);
    if (response.is_discarded() || !response.contains("choices") || response["choices"].empty() ||
        !response["choices"][0].contains("logprobs")) {
      throw CapabilityError("backend returned no logprobs; use the parse strategy");
    }
    const json& logprobs = response["choices"][0]["logprobs"];
    if (!logprobs.contains("token_logprobs") || !logprobs.contains("text_offset")) {
      throw CapabilityError("backend logprobs lack token_logprobs/text_offset");
    }
    const json& token_logprobs = logprobs["token_logprobs"];
    const json& offsets = logprobs["text_offset"];
    double total = 0.0;
    for (std::size_t i = 0; i < token_logprobs.size() && i < offsets.size(); ++i) {
      if (offsets[i].get<std::size_t>() >= prompt.size() && !token_logprobs[i].is_null()) {
        total += token_logprobs[i].get<double>();
      }
    }
    out.push_back(total);
    scripted[candidate] = total;
  }
  trace(log.digest, "logprob", scripted);
  return out;
}

std::vector<std::vector<double>> HttpBackend::do_embed(std::span<const std::string> texts,
                                                       RequestLogEntry& log) {
  json body = {
      {"model", config_.model_name},
      {"input", std::vector<std::string>(texts.begin(), texts.end())},
  };
  std::string raw = post_with_retry(config_.embeddings_path, body.dump(), log);
  json response = json::parse(raw, nullptr, false);
  if (response.is_discarded() || !response.contains("data") || !response["data"].is_array()) {
    throw CapabilityError("backend returned no embedding data");
  }
  std::vector<std::vector<double>> vectors(texts.size());
  std::size_t position = 0;
  for (const json& item : response["data"]) {
    std::size_t index = item.contains("index") ? item["index"].get<std::size_t>() : position;
    if (index >= vectors.size() || !item.contains("embedding")) {
      throw ProtocolError(log.status, "malformed embedding item");
    }
    vectors[index] = item["embedding"].get<std::vector<double>>();
    ++position;
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    trace(embed_digest(texts[i]), "embed", vectors[i]);
  }
  return vectors;
}

}  // namespace facteval::backends
