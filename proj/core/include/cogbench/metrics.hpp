#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cogbench {

// Cohen's kappa between two raters over the same items. Ratings are arbitrary
// integer labels. Perfect observed agreement is 1.0 by definition, which also
// covers the degenerate chance-agreement-1 case.
double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b);

// Fleiss' kappa from an item x category count matrix. Every row must sum to
// the same number of raters n >= 2. Perfect agreement is 1.0 by definition.
double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts);

// Convenience: per_item[i] holds the n annotator ratings for item i, each in
// [1, num_categories].
double fleiss_kappa_ratings(const std::vector<std::vector<int>>& per_item,
                            int num_categories);

enum class Polarity { negative, neutral, positive };

// Likert 1-2 -> negative, 3 -> neutral, 4-5 -> positive. Out-of-range throws.
Polarity to_polarity(int rating);

// Fleiss' kappa after collapsing ratings to the three polarity classes.
double fleiss_kappa_polarity(const std::vector<std::vector<int>>& per_item);

// Spearman's rank correlation: Pearson correlation of mean ranks (ties get
// the mean of their rank span). Undefined for constant input, which callers
// exclude from averages.
std::optional<double> spearman_rho(const std::vector<double>& x,
                                   const std::vector<double>& y);

// Majority vote over Likert ratings. Tie on the mode: the candidate closest
// to the median wins; still tied: the lower rating.
int majority_rating(const std::vector<int>& votes);

// One annotator's Likert judgment of one question at one iteration.
struct RatingRecord {
  std::string annotator_id;
  std::string topic_id;
  int iteration = 0;
  std::string question_id;
  int value = 0;  // 1..5

  bool operator==(const RatingRecord&) const = default;
};

// Reads {"records": [...]} or a bare array. Each record carries annotator_id,
// topic_id, iteration, question_id and either "rating" or "score" in 1..5.
// Throws ConfigError naming the offending record index.
std::vector<RatingRecord> load_rating_records(const std::string& path);

// A model's answer to one question at one iteration.
struct ModelAnswer {
  std::string topic_id;
  int iteration = 0;
  std::string question_id;
  int rating = 0;

  bool operator==(const ModelAnswer&) const = default;
};

struct ReportOptions {
  // Default scores an iteration with one kappa over its (model, majority)
  // pairs. The literal variant averages per-question kappas instead, which
  // reduces to the exact-agreement fraction.
  bool per_question_agreement = false;
};

struct MetricSummary {
  std::optional<double> avg;    // mean over every iteration with a value
  std::optional<double> at_5;   // value at iteration 5
  std::optional<double> at_10;  // value at iteration 10
  std::map<int, double> per_iteration;
};

struct ReportData {
  std::string agent;
  std::string variant;
  MetricSummary authenticity;
  MetricSummary rationality;
  std::vector<std::string> warnings;
};

// Scores model answers against a human panel.
//
// Authenticity at iteration t: for each topic, kappa between the model's
// ratings and the per-question annotator majority; averaged over topics.
// Rationality at iteration t: majority over annotators per question, then the
// mean of those majorities. Coverage gaps become warnings, not errors.
ReportData build_report(const std::string& agent, const std::string& variant,
                        const std::vector<ModelAnswer>& answers,
                        const std::vector<RatingRecord>& authenticity_panel,
                        const std::vector<RatingRecord>& rationality_panel,
                        const ReportOptions& options = {});

void write_report_json(const ReportData& report, const std::string& path);
void write_report_csv(const ReportData& report, const std::string& path);

}  // namespace cogbench
