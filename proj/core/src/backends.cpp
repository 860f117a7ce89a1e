#include "facteval/backends.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "facteval/errors.hpp"
#include "facteval/util/hash.hpp"

namespace facteval::backends {

namespace {

constexpr char kFieldSep = '\x1f';
constexpr char kRecordSep = '\x1e';

void append_messages(std::string& canon, std::span<const ChatMessage> messages) {
  for (const ChatMessage& m : messages) {
    canon += role_name(m.role);
    canon += kFieldSep;
    canon += m.content;
    canon += kRecordSep;
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_messages(std::span<const ChatMessage> messages, bool require_user) {
  bool has_user = false;
  for (const ChatMessage& m : messages) {
    if ((m.role == Role::system || m.role == Role::user) && m.content.empty()) {
      throw std::invalid_argument("system/user message content must be non-empty");
    }
    if (m.role == Role::user) has_user = true;
  }
  if (require_user && !has_user) {
    throw std::invalid_argument("chat requires at least one user message");
  }
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_name(std::string_view name) {
  if (name == "system") return Role::system;
  if (name == "assistant") return Role::assistant;
  if (name == "user") return Role::user;
  throw std::invalid_argument("unknown role: " + std::string(name));
}

void RunLog::append(RequestLogEntry entry) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(entry));
}

std::vector<RequestLogEntry> RunLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t RunLog::total_retries() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const RequestLogEntry& e : entries_) n += static_cast<std::size_t>(e.retries);
  return n;
}

std::string chat_digest(std::span<const ChatMessage> messages, const GenerationParams& params) {
  std::string canon = "chat";
  canon += kRecordSep;
  append_messages(canon, messages);
  canon += "max_new_tokens=" + std::to_string(params.max_new_tokens);
  canon += ";temperature=" + format_double(params.temperature);
  canon += ";seed=" + (params.seed ? std::to_string(*params.seed) : std::string("none"));
  return hash::to_hex(hash::fnv1a64(canon));
}

std::string logprob_digest(std::span<const ChatMessage> messages) {
  std::string canon = "logprob";
  canon += kRecordSep;
  append_messages(canon, messages);
  return hash::to_hex(hash::fnv1a64(canon));
}

std::string embed_digest(std::string_view input_text) {
  std::string canon = "embed";
  canon += kRecordSep;
  canon += input_text;
  return hash::to_hex(hash::fnv1a64(canon));
}

Backend::Backend(int parallelism)
    : parallelism_(parallelism < 1 ? 1 : parallelism), slots_(parallelism_) {}

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<4096>& slots) : slots_(slots) { slots_.acquire(); }
  ~SlotGuard() { slots_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<4096>& slots_;
};

}  // namespace

std::string Backend::chat(std::span<const ChatMessage> messages, const GenerationParams& params) {
  validate_messages(messages, /*require_user=*/true);
  if (params.max_new_tokens < 1) throw std::invalid_argument("max_new_tokens must be >= 1");
  Timer timer;
  RequestLogEntry log{"chat", chat_digest(messages, params), 0, 0.0, 0};
  try {
    SlotGuard slot(slots_);
    std::string out = do_chat(messages, params, log);
    log.latency_ms = timer.elapsed_ms();
    run_log_.append(std::move(log));
    return out;
  } catch (...) {
    log.latency_ms = timer.elapsed_ms();
    run_log_.append(std::move(log));
    throw;
  }
}

std::vector<double> Backend::score_candidates(std::span<const ChatMessage> messages,
                                              std::span<const std::string> candidates) {
  validate_messages(messages, /*require_user=*/false);
  if (candidates.empty()) throw std::invalid_argument("candidates must be non-empty");
  for (const std::string& c : candidates) {
    if (c.empty()) throw std::invalid_argument("candidate strings must be non-empty");
  }
  Timer timer;
  RequestLogEntry log{"logprob", logprob_digest(messages), 0, 0.0, 0};
  try {
    SlotGuard slot(slots_);
    std::vector<double> out = do_score_candidates(messages, candidates, log);
    log.latency_ms = timer.elapsed_ms();
    run_log_.append(std::move(log));
    return out;
  } catch (...) {
    log.latency_ms = timer.elapsed_ms();
    run_log_.append(std::move(log));
    throw;
  }
}

std::vector<std::vector<double>> Backend::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw std::invalid_argument("texts must be non-empty");
  Timer timer;
  RequestLogEntry log{"embed", embed_digest(texts[0]), 0, 0.0, 0};
  try {
    std::vector<std::vector<double>> vectors;
    {
      SlotGuard slot(slots_);
      vectors = do_embed(texts, log);
    }
    if (vectors.size() != texts.size()) {
      throw ProtocolError(0, "embedding count mismatch");
    }
    for (std::vector<double>& v : vectors) {
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& x : v) x /= norm;
      }
    }
    log.latency_ms = timer.elapsed_ms();
    run_log_.append(std::move(log));
    return vectors;
  } catch (...) {
    log.latency_ms = timer.elapsed_ms();
    run_log_.append(std::move(log));
    throw;
  }
}

}  // namespace facteval::backends
