#pragma once

#include <string>
#include <vector>

#include "cogbench/bench.hpp"
#include "cogbench/profile.hpp"
#include "cogbench/prompts.hpp"
#include "cogbench/provider.hpp"

namespace cogbench {

struct SupporterRank {
  std::string supporter;  // normalized: trimmed, lowercased, spaces collapsed
  std::size_t mentions = 0;
  int rank = 0;  // dense from 1 by descending mentions, ties by first appearance

  bool operator==(const SupporterRank&) const = default;
};

// Asks the model for ten distinct opinions on the topic and parses the
// blocks. An entry count other than ten is a warning on the set, not an
// error. Completion or parse failure throws.
OpinionSet generate_opinion_set(const std::string& topic, Provider& provider,
                                const TemplateSet& templates);

// Counts supporter mentions across all entries of all sets and ranks them.
std::vector<SupporterRank> rank_supporters(const std::vector<OpinionSet>& sets);

// Asks the model for a persona document for the given character sketch.
// Missing canonical keys are filled empty with warnings; fewer than ten
// recovered canonical keys is an error.
ProfileDoc generate_profile(const std::string& character, Provider& provider,
                            const TemplateSet& templates,
                            std::vector<std::string>* warnings = nullptr);

// Writes the opinion set as a human-review sheet: every entry plus the four
// checklist flags (relevance, distinctiveness, clarity, contextual_truth),
// all initially unset.
void export_review_sheet(const std::string& topic_id, const OpinionSet& set,
                         const std::string& path);

// Reads a completed sheet back. Entries with all four flags true become the
// questionnaire's questions, statements taken verbatim from the sheet (so
// annotator edits survive). A flag that is not null/true/false is an error
// naming the row.
Questionnaire import_review_sheet(const std::string& path);

}  // namespace cogbench
