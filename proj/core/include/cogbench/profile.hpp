#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cogbench {

inline constexpr std::size_t kCanonicalProfileKeyCount = 22;

// The fixed persona attribute set, in template order.
const std::array<std::string_view, kCanonicalProfileKeyCount>& canonical_profile_keys();

// Returns the canonical spelling for a key, matched case-insensitively,
// or empty if the key is not canonical.
std::string_view canonical_profile_key(std::string_view key);

// Persona document: an ordered list of canonical attributes plus whatever
// non-canonical keys a model reply drifted in.
struct ProfileDoc {
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<std::pair<std::string, std::string>> extras;

  bool has_attribute(std::string_view canonical_key) const;
  std::string_view value(std::string_view canonical_key) const;
  void set(std::string_view key, std::string value);

  // Canonical keys absent from `attributes`, in template order.
  std::vector<std::string> missing_canonical() const;
  // Appends missing canonical keys with empty values, keeping existing order.
  void fill_missing_canonical();

  // "Key: value" lines, attributes first, then extras.
  std::string to_text() const;

  bool operator==(const ProfileDoc&) const = default;
};

struct ProfileParseStats {
  std::size_t canonical_recovered = 0;
  std::vector<std::string> warnings;
};

// Parses "Key: value" lines into a ProfileDoc. Canonical keys are matched
// case-insensitively and stored with canonical spelling; unknown keys land in
// extras with a warning. Lines without a key prefix continue the previous
// value. Missing canonical keys are appended with empty values.
ProfileDoc parse_profile_lines(std::string_view text, ProfileParseStats* stats = nullptr);

}  // namespace cogbench
