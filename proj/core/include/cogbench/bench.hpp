#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cogbench/profile.hpp"

namespace cogbench {

struct Question {
  std::string id;
  std::string topic_id;
  std::string statement;  // an assertive opinion

  bool operator==(const Question&) const = default;
};

struct Questionnaire {
  std::string topic_id;
  std::vector<Question> questions;  // m >= 1; the canonical layout has m = 10

  bool operator==(const Questionnaire&) const = default;
};

enum class Modality { article, video_text };

enum class BenchVariant { a, v };  // a = articles, v = short-video texts

std::string_view variant_name(BenchVariant v);
std::string_view modality_name(Modality m);

struct InfoItem {
  std::string id;
  std::string topic_id;
  std::string category;
  Modality modality = Modality::article;
  std::string text;
  std::size_t word_count = 0;

  bool operator==(const InfoItem&) const = default;
};

struct NamedProfile {
  std::string name;
  ProfileDoc doc;

  bool operator==(const NamedProfile&) const = default;
};

struct BenchmarkSet {
  std::string name;
  BenchVariant variant = BenchVariant::a;
  std::vector<Questionnaire> questionnaires;
  std::vector<NamedProfile> profiles;
  std::map<std::string, std::vector<InfoItem>> flows;  // topic_id -> corpus order

  const Questionnaire* find_questionnaire(const std::string& topic_id) const;
  const NamedProfile* find_profile(const std::string& name) const;

  bool operator==(const BenchmarkSet&) const = default;
};

// Items perceived per iteration: 1 article for variant a, 10 video texts for
// variant v.
std::size_t batch_size_for(BenchVariant v);

inline constexpr int kCanonicalIterations = 10;

struct IterationPlan {
  std::string topic_id;
  std::vector<std::vector<std::string>> batches;  // InfoItem ids per iteration
  int iterations() const { return static_cast<int>(batches.size()); }
};

// Loads a benchmark root (bench.json, questionnaires/, profiles/, flows/).
// Throws ConfigError on missing files, schema violations (reported with a
// file and JSON pointer) and duplicate ids.
BenchmarkSet load_benchmark(const std::string& path);

// Writes the same layout load_benchmark reads; load(save(b)) == b.
void save_benchmark(const BenchmarkSet& bench, const std::string& path);

// Splits a topic's flow into per-iteration batches, in corpus order. Strict
// mode requires full batches and exactly 10 iterations.
IterationPlan plan_iterations(const BenchmarkSet& bench, const std::string& topic_id,
                              bool strict);

struct CategoryStats {
  std::size_t items = 0;
  std::size_t total_words = 0;
  double mean_words = 0.0;
};

struct StatsTable {
  std::map<std::string, CategoryStats> per_category;
  CategoryStats overall;
};

// Mean word counts grouped by category plus the grand mean.
StatsTable corpus_stats(const BenchmarkSet& bench);

struct Violation {
  std::string where;  // e.g. "profiles/ana", "flows/fishing"
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Report-only invariant check: flow counts per variant, empty texts, missing
// canonical profile keys.
ValidationReport validate_benchmark(const BenchmarkSet& bench);

}  // namespace cogbench
