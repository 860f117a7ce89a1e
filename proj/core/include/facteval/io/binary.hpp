#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace facteval::io {

/// Append-only buffer with the store's wire conventions: integers are
/// little-endian 64-bit, strings are length-prefixed UTF-8.
class BinaryWriter {
 public:
  void u64(std::uint64_t v);
  void str(std::string_view s);
  void raw(std::string_view bytes);

  const std::string& buffer() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  std::string buf_;
};

/// Cursor over an in-memory byte buffer. Throws StoreError on truncation.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64();
  std::string str();
  void seek(std::size_t pos);
  std::size_t position() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }
  bool exhausted() const { return pos_ >= bytes_.size(); }

 private:
  void require(std::size_t n) const;

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

/// Reads a whole file into memory. Throws IoError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes via a temp file in the same directory, then renames into
/// place, so readers never observe a partially written file.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace facteval::io
