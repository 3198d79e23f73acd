#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace partnerlab::hashing {

// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

// Hex SHA-256 of a file's content. Throws DataError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

// 64-bit FNV-1a, used for feature hashing (stable across platforms).
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace partnerlab::hashing
