#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ppg {

// FNV-1a, 64-bit. Fast, dependency-free, and stable across platforms; used
// for artifact content hashes and model schema tags, not for security.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value);

// Streaming variant for hashing files without loading them whole.
class Fnv1a64 {
  public:
    void update(const char* data, std::size_t size) {
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= static_cast<unsigned char>(data[i]);
            hash_ *= 0x100000001b3ull;
        }
    }
    std::uint64_t value() const { return hash_; }

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

// Hash of a file's raw bytes, rendered as 16 lowercase hex digits.
std::string hash_file(const std::string& path);

}  // namespace ppg
