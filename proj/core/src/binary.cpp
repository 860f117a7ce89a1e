#include "facteval/io/binary.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "facteval/errors.hpp"

namespace facteval::io {

void BinaryWriter::u64(std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  buf_.append(bytes, 8);
}

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  buf_.append(s.data(), s.size());
}

void BinaryWriter::raw(std::string_view bytes) { buf_.append(bytes.data(), bytes.size()); }

void BinaryReader::require(std::size_t n) const {
  if (pos_ + n > bytes_.size()) {
    throw StoreError("truncated record: need " + std::to_string(n) + " bytes at offset " +
                     std::to_string(pos_) + " of " + std::to_string(bytes_.size()));
  }
}

std::uint64_t BinaryReader::u64() {
  require(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return v;
}

std::string BinaryReader::str() {
  std::uint64_t n = u64();
  require(n);
  std::string s(bytes_.substr(pos_, n));
  pos_ += n;
  return s;
}

void BinaryReader::seek(std::size_t pos) {
  if (pos > bytes_.size()) {
    throw StoreError("seek past end: " + std::to_string(pos) + " > " +
                     std::to_string(bytes_.size()));
  }
  pos_ = pos;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

}  // namespace facteval::io
