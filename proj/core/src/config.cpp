#include "facteval/config.hpp"

#include <cstdlib>
#include <fstream>

#include "facteval/errors.hpp"
#include "facteval/http_backend.hpp"
#include "facteval/mock_backend.hpp"
#include "facteval/util/text.hpp"

namespace facteval::config {

namespace {

std::string interpolate_env(const std::string& value, const std::filesystem::path& origin) {
  std::string out;
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      std::size_t close = value.find('}', i + 2);
      if (close == std::string::npos) {
        throw ConfigError(origin.string() + ": unterminated ${ in \"" + value + "\"");
      }
      std::string name = value.substr(i + 2, close - i - 2);
      const char* env = std::getenv(name.c_str());
      out += env ? env : "";
      i = close + 1;
    } else {
      out.push_back(value[i++]);
    }
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected integer, got \"" + value + "\"");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected number, got \"" + value + "\"");
  }
}

/// Applies one `<prefix>.<field> = value` entry to a BackendSpec.
bool apply_backend_key(BackendSpec& spec, const std::string& field, const std::string& key,
                       const std::string& value) {
  if (field == "kind") {
    if (value != "http" && value != "mock") {
      throw ConfigError("config key " + key + ": kind must be http or mock");
    }
    spec.kind = value;
  } else if (field == "endpoint_url") {
    spec.http.endpoint_url = value;
  } else if (field == "model_name") {
    spec.http.model_name = value;
  } else if (field == "api_key_env") {
    spec.http.api_key_env = value;
  } else if (field == "timeout_seconds") {
    spec.http.timeout_seconds = parse_real(key, value);
  } else if (field == "max_retries") {
    spec.http.max_retries = static_cast<int>(parse_int(key, value));
  } else if (field == "parallelism") {
    spec.parallelism = static_cast<int>(parse_int(key, value));
    if (spec.parallelism < 1) throw ConfigError("config key " + key + ": parallelism must be >= 1");
    spec.http.parallelism = spec.parallelism;
  } else if (field == "backoff_base_seconds") {
    spec.http.backoff_base_seconds = parse_real(key, value);
  } else if (field == "chat_path") {
    spec.http.chat_path = value;
  } else if (field == "completions_path") {
    spec.http.completions_path = value;
  } else if (field == "embeddings_path") {
    spec.http.embeddings_path = value;
  } else if (field == "completion_extra_json") {
    spec.http.completion_extra_json = value;
  } else if (field == "script") {
    spec.mock_script = value;
  } else if (field == "hash_embedding_dim") {
    spec.mock_hash_embedding_dim = static_cast<std::size_t>(parse_int(key, value));
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());

  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + " line " + std::to_string(line_number) +
                        ": expected key = value");
    }
    std::string key(text::trim(trimmed.substr(0, eq)));
    std::string value(text::trim(trimmed.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError(path.string() + " line " + std::to_string(line_number) + ": empty key");
    }
    out[key] = interpolate_env(value, path);
  }
  return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig config;
  bool saw_embedding_backend = false;
  BackendSpec embedding_spec;

  for (const auto& [key, value] : parse_key_values(path)) {
    std::size_t dot = key.find('.');
    if (dot != std::string::npos) {
      std::string prefix = key.substr(0, dot);
      std::string field = key.substr(dot + 1);
      BackendSpec* spec = nullptr;
      if (prefix == "afg_backend") spec = &config.afg_backend;
      else if (prefix == "afv_backend") spec = &config.afv_backend;
      else if (prefix == "embedding_backend") spec = &embedding_spec;
      if (spec == nullptr || !apply_backend_key(*spec, field, key, value)) {
        throw ConfigError("unknown config key: " + key);
      }
      if (prefix == "embedding_backend") saw_embedding_backend = true;
      continue;
    }
    if (key == "kb_store_path") config.kb_store_path = value;
    else if (key == "demo_pool_path") config.demo_pool_path = value;
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "strategy") config.strategy = afv::ValidationStrategy::from_name(value);
    else if (key == "max_new_tokens") {
      config.generation.max_new_tokens = static_cast<int>(parse_int(key, value));
    } else if (key == "temperature") {
      config.generation.temperature = parse_real(key, value);
    } else if (key == "chunk_size") {
      config.chunk_size = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "top_k_passages") {
      config.top_k_passages = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(parse_int(key, value));
      config.generation.seed = config.seed;
    } else if (key == "subject_model") {
      config.subject_model = value;
    } else if (key == "retrieval_mode") {
      if (value != "bm25" && value != "embedding") {
        throw ConfigError("retrieval_mode must be bm25 or embedding");
      }
      config.retrieval_mode = value;
    } else if (key == "scorer") {
      if (value != "token-f1" && value != "embedding-f1") {
        throw ConfigError("scorer must be token-f1 or embedding-f1");
      }
      config.scorer = value;
    } else if (key == "trace_path") {
      config.trace_path = value;
    } else if (key == "abstention_patterns") {
      config.abstention_patterns.clear();
      std::size_t start = 0;
      while (start <= value.size()) {
        std::size_t bar = value.find('|', start);
        if (bar == std::string::npos) bar = value.size();
        std::string pattern(text::trim(value.substr(start, bar - start)));
        if (!pattern.empty()) config.abstention_patterns.push_back(std::move(pattern));
        start = bar + 1;
      }
    } else if (key == "strip_reasoning") {
      if (value != "true" && value != "false") {
        throw ConfigError("strip_reasoning must be true or false");
      }
      config.strip_reasoning = value == "true";
    } else if (key == "reasoning_open") {
      config.reasoning_open = value;
    } else if (key == "reasoning_close") {
      config.reasoning_close = value;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  if (saw_embedding_backend) config.embedding_backend = embedding_spec;
  return config;
}

void validate_for_score(const RunConfig& config) {
  if (config.top_k_passages < 1) throw ConfigError("top_k_passages must be >= 1");
  if (config.kb_store_path.empty() || !std::filesystem::exists(config.kb_store_path)) {
    throw ConfigError("kb_store_path missing or does not exist: " +
                      config.kb_store_path.string());
  }
  if (config.demo_pool_path.empty() || !std::filesystem::exists(config.demo_pool_path)) {
    throw ConfigError("demo_pool_path missing or does not exist: " +
                      config.demo_pool_path.string());
  }
  auto check_backend = [](const BackendSpec& spec, const std::string& name) {
    if (spec.kind == "mock") {
      if (spec.mock_script.empty()) {
        if (spec.mock_hash_embedding_dim == 0) {
          throw ConfigError(name + ": mock backend needs a script or hash_embedding_dim");
        }
      } else if (!std::filesystem::exists(spec.mock_script)) {
        throw ConfigError(name + ".script does not exist: " + spec.mock_script.string());
      }
    } else if (spec.http.endpoint_url.empty()) {
      throw ConfigError(name + ".endpoint_url is required for http backends");
    }
  };
  check_backend(config.afg_backend, "afg_backend");
  check_backend(config.afv_backend, "afv_backend");
  if (config.retrieval_mode == "embedding" || config.scorer == "embedding-f1") {
    if (!config.embedding_backend) {
      throw ConfigError("embedding_backend is required for embedding retrieval/scoring");
    }
    check_backend(*config.embedding_backend, "embedding_backend");
  }
}

std::unique_ptr<backends::Backend> make_backend(const BackendSpec& spec,
                                                const std::filesystem::path& trace_path) {
  if (spec.kind == "mock") {
    backends::MockBackend::Options options;
    options.parallelism = spec.parallelism;
    options.hash_embedding_dim = spec.mock_hash_embedding_dim;
    backends::MockBackend::Script script;
    if (!spec.mock_script.empty()) {
      script = backends::MockBackend::load_script(spec.mock_script);
    }
    return std::make_unique<backends::MockBackend>(std::move(script), options);
  }
  auto backend = std::make_unique<backends::HttpBackend>(spec.http);
  if (!trace_path.empty()) backend->set_trace_file(trace_path);
  return backend;
}

nlohmann::json to_json(const RunConfig& config) {
  auto backend_json = [](const BackendSpec& spec) {
    return nlohmann::json{
        {"kind", spec.kind},
        {"endpoint_url", spec.http.endpoint_url},
        {"model_name", spec.http.model_name},
        {"api_key_env", spec.http.api_key_env},
        {"timeout_seconds", spec.http.timeout_seconds},
        {"max_retries", spec.http.max_retries},
        {"parallelism", spec.parallelism},
        {"backoff_base_seconds", spec.http.backoff_base_seconds},
        {"mock_script", spec.mock_script.string()},
        {"mock_hash_embedding_dim", spec.mock_hash_embedding_dim},
    };
  };
  nlohmann::json j = {
      {"kb_store_path", config.kb_store_path.string()},
      {"demo_pool_path", config.demo_pool_path.string()},
      {"output_dir", config.output_dir.string()},
      {"afg_backend", backend_json(config.afg_backend)},
      {"afv_backend", backend_json(config.afv_backend)},
      {"strategy", std::string(afv::strategy_name(config.strategy.kind))},
      {"max_new_tokens", config.generation.max_new_tokens},
      {"temperature", config.generation.temperature},
      {"chunk_size", config.chunk_size},
      {"top_k_passages", config.top_k_passages},
      {"seed", config.seed},
      {"subject_model", config.subject_model},
      {"retrieval_mode", config.retrieval_mode},
      {"scorer", config.scorer},
      {"trace_path", config.trace_path.string()},
      {"abstention_patterns", config.abstention_patterns},
      {"strip_reasoning", config.strip_reasoning},
      {"reasoning_open", config.reasoning_open},
      {"reasoning_close", config.reasoning_close},
  };
  if (config.embedding_backend) {
    j["embedding_backend"] = backend_json(*config.embedding_backend);
  }
  return j;
}

}  // namespace facteval::config
