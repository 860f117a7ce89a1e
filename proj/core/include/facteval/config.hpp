#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "facteval/afv.hpp"
#include "facteval/backends.hpp"

namespace facteval::config {

/// Backend selection: "http" talks to an endpoint, "mock" replays a script.
struct BackendSpec {
  std::string kind = "http";
  backends::BackendConfig http;
  std::filesystem::path mock_script;
  std::size_t mock_hash_embedding_dim = 0;
  int parallelism = 1;
};

struct RunConfig {
  std::filesystem::path kb_store_path;
  std::filesystem::path demo_pool_path;
  std::filesystem::path output_dir = ".";
  BackendSpec afg_backend;
  BackendSpec afv_backend;
  std::optional<BackendSpec> embedding_backend;
  afv::ValidationStrategy strategy;
  backends::GenerationParams generation;
  std::size_t chunk_size = 256;
  std::size_t top_k_passages = 5;
  std::uint64_t seed = 0;
  std::string subject_model = "subject";
  std::string retrieval_mode = "bm25";  // bm25 | embedding
  std::string scorer = "token-f1";      // token-f1 | embedding-f1
  std::filesystem::path trace_path;     // mirror backend traffic when set
  std::vector<std::string> abstention_patterns;  // empty = built-in defaults
  bool strip_reasoning = true;
  std::string reasoning_open = "<think>";
  std::string reasoning_close = "</think>";
};

/// `key = value` lines, `#` comments, ${ENV_VAR} interpolation in values.
/// Keys are dotted paths (afv_backend.endpoint_url = ...).
std::map<std::string, std::string> parse_key_values(const std::filesystem::path& path);

/// Parses a config file into a RunConfig. Unknown keys raise ConfigError so
/// typos fail loudly.
RunConfig load_run_config(const std::filesystem::path& path);

/// Checks that referenced paths exist and bounds hold (top_k >= 1, ...).
/// Throws ConfigError. Paths required only by specific commands are checked
/// by those commands.
void validate_for_score(const RunConfig& config);

/// Builds a backend from its spec; trace_path, when non-empty, mirrors HTTP
/// traffic in the mock-script format.
std::unique_ptr<backends::Backend> make_backend(const BackendSpec& spec,
                                                const std::filesystem::path& trace_path = {});

/// Config snapshot for the run manifest (secrets stay as env references).
nlohmann::json to_json(const RunConfig& config);

}  // namespace facteval::config
