#include "facteval/io/jsonl.hpp"

#include <fstream>

#include "facteval/errors.hpp"
#include "facteval/io/binary.hpp"
#include "facteval/util/text.hpp"

namespace facteval::io {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn,
                    const std::function<void(std::size_t, const std::string&)>& on_bad) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::trim(line).empty()) continue;
    nlohmann::json parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
      if (on_bad) on_bad(line_number, line);
      continue;
    }
    fn(line_number, parsed);
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  for_each_jsonl(path, [&](std::size_t, const nlohmann::json& j) { out.push_back(j); });
  return out;
}

std::string render_jsonl(const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
  atomic_write_file(path, render_jsonl(records));
}

}  // namespace facteval::io
