#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cogbench {

// Raised for bad configuration, unusable input files and schema violations.
// The CLI maps it to exit code 2; every other exception maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = kFnvOffsetBasis) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Feeds the eight little-endian bytes of v into an FNV-1a state.
inline std::uint64_t fnv1a64_mix(std::uint64_t v, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t v);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
// Trims, lowercases, and collapses internal whitespace runs to single spaces.
std::string normalize_token(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
// Count of whitespace-delimited tokens.
std::size_t word_count(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

std::string read_file(const std::string& path);
// Writes via a sibling temp file followed by a rename.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace cogbench
