#include "facteval/util/hash.hpp"

#include "facteval/io/binary.hpp"

namespace facteval::hash {

std::string file_digest(const std::string& path) {
  return to_hex(fnv1a64(io::read_file(path)));
}

}  // namespace facteval::hash
