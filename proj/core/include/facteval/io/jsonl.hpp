#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace facteval::io {

/// Calls fn(line_number, parsed) for every non-blank line; malformed lines go
/// to on_bad (line_number, raw text) when provided, otherwise are skipped.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn,
                    const std::function<void(std::size_t, const std::string&)>& on_bad = {});

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// One compact JSON document per line; written atomically.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

std::string render_jsonl(const std::vector<nlohmann::json>& records);

}  // namespace facteval::io
