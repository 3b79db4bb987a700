#include "cogbench/profile.hpp"

#include <sstream>

#include "cogbench/util.hpp"

namespace cogbench {

const std::array<std::string_view, kCanonicalProfileKeyCount>& canonical_profile_keys() {
  static const std::array<std::string_view, kCanonicalProfileKeyCount> keys = {
      "Name",
      "Gender",
      "Age",
      "Place of Birth",
      "Occupation",
      "Height",
      "Weight",
      "Distinguishing Marks",
      "Personality",
      "Hobbies",
      "Skills",
      "Dislikes",
      "Values",
      "Religious Beliefs",
      "Interpersonal Relationships",
      "Flaws",
      "External Environment",
      "Financial Status",
      "Family Background",
      "Educational Background",
      "Significant Experiences",
      "Future Outlook",
  };
  return keys;
}

std::string_view canonical_profile_key(std::string_view key) {
  const std::string norm = normalize_token(key);
  for (std::string_view k : canonical_profile_keys()) {
    if (normalize_token(k) == norm) return k;
  }
  return {};
}

bool ProfileDoc::has_attribute(std::string_view canonical_key) const {
  for (const auto& [k, v] : attributes) {
    if (k == canonical_key) return true;
  }
  return false;
}

std::string_view ProfileDoc::value(std::string_view canonical_key) const {
  for (const auto& [k, v] : attributes) {
    if (k == canonical_key) return v;
  }
  return {};
}

void ProfileDoc::set(std::string_view key, std::string value) {
  std::string_view canon = canonical_profile_key(key);
  auto& bucket = canon.empty() ? extras : attributes;
  const std::string stored_key = canon.empty() ? std::string(key) : std::string(canon);
  for (auto& [k, v] : bucket) {
    if (k == stored_key) {
      v = std::move(value);
      return;
    }
  }
  bucket.emplace_back(stored_key, std::move(value));
}

std::vector<std::string> ProfileDoc::missing_canonical() const {
  std::vector<std::string> missing;
  for (std::string_view k : canonical_profile_keys()) {
    if (!has_attribute(k)) missing.emplace_back(k);
  }
  return missing;
}

void ProfileDoc::fill_missing_canonical() {
  for (std::string_view k : canonical_profile_keys()) {
    if (!has_attribute(k)) attributes.emplace_back(std::string(k), "");
  }
}

std::string ProfileDoc::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : attributes) out << k << ": " << v << "\n";
  for (const auto& [k, v] : extras) out << k << ": " << v << "\n";
  return out.str();
}

namespace {

// Splits a "Key: value" line. The key is everything before the first colon;
// keys longer than 40 chars or containing sentence punctuation are treated as
// prose, not keys.
bool split_key_line(std::string_view line, std::string& key, std::string& value) {
  std::size_t colon = line.find(':');
  if (colon == std::string_view::npos) return false;
  std::string_view raw_key = line.substr(0, colon);
  // strip a leading list marker
  std::string k = trim(raw_key);
  if (!k.empty() && (k[0] == '-' || k[0] == '*')) k = trim(std::string_view(k).substr(1));
  if (k.empty() || k.size() > 40) return false;
  for (char c : k) {
    if (c == '.' || c == ',' || c == '"' || c == '{' || c == '}') return false;
  }
  key = k;
  value = trim(line.substr(colon + 1));
  return true;
}

}  // namespace

ProfileDoc parse_profile_lines(std::string_view text, ProfileParseStats* stats) {
  ProfileDoc doc;
  ProfileParseStats local;
  ProfileParseStats& st = stats ? *stats : local;

  std::string* last_value = nullptr;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    std::string key, value;
    if (split_key_line(line, key, value)) {
      std::string_view canon = canonical_profile_key(key);
      if (!canon.empty()) {
        bool duplicate = false;
        for (auto& [k, v] : doc.attributes) {
          if (k == canon) {
            st.warnings.push_back("duplicate profile key: " + std::string(canon));
            v = value;
            last_value = &v;
            duplicate = true;
            break;
          }
        }
        if (!duplicate) {
          doc.attributes.emplace_back(std::string(canon), value);
          ++st.canonical_recovered;
          last_value = &doc.attributes.back().second;
        }
      } else {
        st.warnings.push_back("unknown profile key moved to extras: " + key);
        doc.extras.emplace_back(key, value);
        last_value = &doc.extras.back().second;
      }
    } else {
      std::string cont = trim(line);
      if (!cont.empty() && last_value) {
        if (!last_value->empty()) last_value->push_back(' ');
        last_value->append(cont);
      }
    }
    if (eol == text.size()) break;
  }

  for (const std::string& k : doc.missing_canonical()) {
    st.warnings.push_back("missing profile key filled empty: " + k);
  }
  doc.fill_missing_canonical();
  // The update prompt asks for values under 30 characters; longer ones are
  // survivable drift, not failures.
  for (const auto& [k, v] : doc.attributes) {
    if (v.size() >= 30) {
      st.warnings.push_back("profile value not under 30 characters: " + k);
    }
  }
  return doc;
}

}  // namespace cogbench
