#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cogbench/profile.hpp"
#include "cogbench/result.hpp"

namespace cogbench {

enum class TemplateId {
  profile_update,
  knowledge_distill,
  interpret,
  questionnaire_design,
  profile_create,
};

std::string_view template_id_name(TemplateId id);

// The five pinned prompt templates, loaded from data files and byte-checked
// against digests compiled into the library so any drift in the shipped text
// is caught at startup.
class TemplateSet {
 public:
  // Loads "<dir>/<id>.txt" for the five pinned ids and verifies digests.
  // Throws ConfigError on a missing file or digest mismatch.
  static TemplateSet load(const std::string& dir);

  const std::string& body(TemplateId id) const;
  static std::uint64_t pinned_digest(TemplateId id);

 private:
  std::map<TemplateId, std::string> bodies_;
};

// Placeholder names a template body may use.
bool is_known_placeholder(std::string_view name);

// Replaces each "{name}" occurrence with bindings.at(name), exactly once per
// occurrence (substituted text is never rescanned). Throws ConfigError when a
// placeholder in the body has no binding. Brace runs that do not form a known
// "{name}" token pass through untouched.
std::string render_template(std::string_view body,
                            const std::map<std::string, std::string>& bindings);

struct ParsedProfileUpdate {
  std::string assessments;
  std::string thoughts;
  ProfileDoc updated_profile;
  std::vector<std::string> warnings;
};

// Splits a profile-update reply on its "Assessments:" / "Thoughts:" /
// "Updated Profile:" headers (case-insensitive, first occurrence each, in
// that order) and parses the profile section as "Key: value" lines.
Result<ParsedProfileUpdate> parse_profile_update(std::string_view text);

struct KnowledgeDraft {
  std::string thoughts;
  std::string knowledge;
  int score = 0;  // 1..5

  bool operator==(const KnowledgeDraft&) const = default;
};

struct KnowledgeParseOptions {
  // When true, elements with missing keys or out-of-range scores are skipped
  // instead of failing the whole reply.
  bool skip_bad_elements = false;
};

// Extracts the first balanced top-level JSON array from the reply (code
// fences and surrounding prose are tolerated) and decodes its elements.
Result<std::vector<KnowledgeDraft>> parse_knowledge_list(
    std::string_view text, const KnowledgeParseOptions& opts = {});

struct ParsedInterpretation {
  std::string thoughts;
  int rating = 0;  // 1..5
};

// Pulls the first-person reasoning and the Likert rating out of a reply of
// the "Thoughts: ... / Rating: N" shape. Accepts forms like "4/5" and
// "4 points"; the first integer in 1..5 after "Rating:" wins.
Result<ParsedInterpretation> parse_interpretation(std::string_view text);

struct OpinionEntry {
  int number = 0;
  std::string perspective;
  std::string opinion;
  std::vector<std::string> supporters;
  std::string reasons;

  bool operator==(const OpinionEntry&) const = default;
};

struct OpinionSet {
  std::vector<OpinionEntry> entries;
  std::vector<std::string> warnings;
};

// Parses repeated Number/Perspective/Opinion/Supporters/Reasons blocks.
// Incomplete blocks are skipped with a warning; zero complete blocks or a
// duplicate number is an error.
Result<OpinionSet> parse_opinion_set(std::string_view text);

}  // namespace cogbench
