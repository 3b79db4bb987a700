#include "cogbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "cogbench/util.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace cogbench {

double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty()) throw std::invalid_argument("cohen_kappa: empty input");
  if (a.size() != b.size()) {
    throw std::invalid_argument("cohen_kappa: rater vectors differ in length");
  }
  const double n = static_cast<double>(a.size());
  std::map<int, double> freq_a, freq_b;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    freq_a[a[i]] += 1.0;
    freq_b[b[i]] += 1.0;
  }
  if (agree == a.size()) return 1.0;
  const double po = static_cast<double>(agree) / n;
  double pe = 0.0;
  for (const auto& [label, count_a] : freq_a) {
    auto it = freq_b.find(label);
    if (it != freq_b.end()) pe += (count_a / n) * (it->second / n);
  }
  // pe == 1 forces perfect agreement, handled above, so the division is safe.
  return (po - pe) / (1.0 - pe);
}

double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.empty()) throw std::invalid_argument("fleiss_kappa: no items");
  const std::size_t k = counts[0].size();
  if (k == 0) throw std::invalid_argument("fleiss_kappa: no categories");
  std::size_t raters = std::accumulate(counts[0].begin(), counts[0].end(),
                                       std::size_t{0});
  if (raters < 2) throw std::invalid_argument("fleiss_kappa: need >= 2 raters");

  const double n = static_cast<double>(raters);
  const double N = static_cast<double>(counts.size());
  std::vector<double> category_mass(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : counts) {
    if (row.size() != k) {
      throw std::invalid_argument("fleiss_kappa: ragged count matrix");
    }
    std::size_t row_sum = 0;
    double sq = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      row_sum += row[c];
      sq += static_cast<double>(row[c]) * static_cast<double>(row[c]);
      category_mass[c] += static_cast<double>(row[c]);
    }
    if (row_sum != raters) {
      throw std::invalid_argument("fleiss_kappa: inconsistent rater count per item");
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= N;
  if (p_bar >= 1.0) return 1.0;  // perfect agreement by definition

  double p_bar_e = 0.0;
  for (double mass : category_mass) {
    const double p = mass / (N * n);
    p_bar_e += p * p;
  }
  return (p_bar - p_bar_e) / (1.0 - p_bar_e);
}

double fleiss_kappa_ratings(const std::vector<std::vector<int>>& per_item,
                            int num_categories) {
  if (num_categories < 1) {
    throw std::invalid_argument("fleiss_kappa_ratings: num_categories < 1");
  }
  std::vector<std::vector<std::size_t>> counts;
  counts.reserve(per_item.size());
  for (const auto& ratings : per_item) {
    std::vector<std::size_t> row(static_cast<std::size_t>(num_categories), 0);
    for (int r : ratings) {
      if (r < 1 || r > num_categories) {
        throw std::invalid_argument("fleiss_kappa_ratings: rating out of range");
      }
      row[static_cast<std::size_t>(r - 1)] += 1;
    }
    counts.push_back(std::move(row));
  }
  return fleiss_kappa(counts);
}

Polarity to_polarity(int rating) {
  switch (rating) {
    case 1:
    case 2:
      return Polarity::negative;
    case 3:
      return Polarity::neutral;
    case 4:
    case 5:
      return Polarity::positive;
    default:
      throw std::invalid_argument("to_polarity: rating " + std::to_string(rating) +
                                  " outside 1..5");
  }
}

double fleiss_kappa_polarity(const std::vector<std::vector<int>>& per_item) {
  std::vector<std::vector<std::size_t>> counts;
  counts.reserve(per_item.size());
  for (const auto& ratings : per_item) {
    std::vector<std::size_t> row(3, 0);
    for (int r : ratings) row[static_cast<std::size_t>(to_polarity(r))] += 1;
    counts.push_back(std::move(row));
  }
  return fleiss_kappa(counts);
}

namespace {

// Mean ranks, 1-based; tied values share the mean of their rank span.
std::vector<double> mean_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0) return std::nullopt;
  return cov / std::sqrt(vx * vy);
}

}  // namespace

std::optional<double> spearman_rho(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("spearman_rho: vectors differ in length");
  }
  if (x.size() < 2) return std::nullopt;
  return pearson(mean_ranks(x), mean_ranks(y));
}

int majority_rating(const std::vector<int>& votes) {
  if (votes.empty()) throw std::invalid_argument("majority_rating: empty input");
  std::size_t counts[6] = {0, 0, 0, 0, 0, 0};
  for (int v : votes) {
    if (v < 1 || v > 5) {
      throw std::invalid_argument("majority_rating: rating " + std::to_string(v) +
                                  " outside 1..5");
    }
    counts[v] += 1;
  }
  std::size_t best_count = 0;
  for (int r = 1; r <= 5; ++r) best_count = std::max(best_count, counts[r]);

  std::vector<int> sorted(votes);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1
                            ? static_cast<double>(sorted[n / 2])
                            : (static_cast<double>(sorted[n / 2 - 1]) +
                               static_cast<double>(sorted[n / 2])) /
                                  2.0;

  int winner = 0;
  double winner_distance = 0.0;
  for (int r = 1; r <= 5; ++r) {
    if (counts[r] != best_count) continue;
    const double d = std::abs(static_cast<double>(r) - median);
    if (winner == 0 || d < winner_distance) {
      winner = r;
      winner_distance = d;
    }
  }
  return winner;
}

std::vector<RatingRecord> load_rating_records(const std::string& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + ": not valid JSON");

  const json* records = nullptr;
  std::string base;
  if (doc.is_array()) {
    records = &doc;
  } else if (doc.is_object() && doc.contains("records") && doc["records"].is_array()) {
    records = &doc["records"];
    base = "/records";
  } else {
    throw ConfigError(path + ": expected an array or {\"records\": [...]}");
  }

  auto fail = [&](std::size_t i, const std::string& field, const std::string& msg)
      -> ConfigError {
    return ConfigError(path + ": " + base + "/" + std::to_string(i) + "/" + field +
                       ": " + msg);
  };

  std::vector<RatingRecord> out;
  for (std::size_t i = 0; i < records->size(); ++i) {
    const json& r = (*records)[i];
    if (!r.is_object()) {
      throw ConfigError(path + ": " + base + "/" + std::to_string(i) +
                        ": expected object");
    }
    RatingRecord rec;
    auto get_string = [&](const char* field) {
      if (!r.contains(field) || !r[field].is_string() ||
          r[field].get<std::string>().empty()) {
        throw fail(i, field, "expected non-empty string");
      }
      return r[field].get<std::string>();
    };
    rec.annotator_id = get_string("annotator_id");
    rec.topic_id = get_string("topic_id");
    rec.question_id = get_string("question_id");
    if (!r.contains("iteration") || !r["iteration"].is_number_integer() ||
        r["iteration"].get<int>() < 0) {
      throw fail(i, "iteration", "expected integer >= 0");
    }
    rec.iteration = r["iteration"].get<int>();
    const char* value_key = r.contains("rating") ? "rating" : "score";
    if (!r.contains(value_key) || !r[value_key].is_number_integer()) {
      throw fail(i, value_key, "expected integer rating in 1..5");
    }
    rec.value = r[value_key].get<int>();
    if (rec.value < 1 || rec.value > 5) {
      throw fail(i, value_key, "rating " + std::to_string(rec.value) + " outside 1..5");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

using TopicIter = std::pair<std::string, int>;

// question_id -> votes, one per annotator
using VoteMap = std::map<std::string, std::vector<int>>;

std::map<TopicIter, VoteMap> index_panel(const std::vector<RatingRecord>& panel) {
  std::map<TopicIter, VoteMap> out;
  for (const auto& r : panel) {
    out[{r.topic_id, r.iteration}][r.question_id].push_back(r.value);
  }
  return out;
}

std::optional<double> mean_of(const std::map<int, double>& per_iteration) {
  if (per_iteration.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [iter, v] : per_iteration) sum += v;
  return sum / static_cast<double>(per_iteration.size());
}

std::optional<double> value_at(const std::map<int, double>& per_iteration, int iter) {
  auto it = per_iteration.find(iter);
  if (it == per_iteration.end()) return std::nullopt;
  return it->second;
}

void finish(MetricSummary& m) {
  m.avg = mean_of(m.per_iteration);
  m.at_5 = value_at(m.per_iteration, 5);
  m.at_10 = value_at(m.per_iteration, 10);
}

json to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

ReportData build_report(const std::string& agent, const std::string& variant,
                        const std::vector<ModelAnswer>& answers,
                        const std::vector<RatingRecord>& authenticity_panel,
                        const std::vector<RatingRecord>& rationality_panel,
                        const ReportOptions& options) {
  ReportData report;
  report.agent = agent;
  report.variant = variant;

  std::map<TopicIter, std::map<std::string, int>> model;
  for (const auto& a : answers) {
    model[{a.topic_id, a.iteration}][a.question_id] = a.rating;
  }
  const auto auth = index_panel(authenticity_panel);
  const auto rat = index_panel(rationality_panel);

  auto warn = [&](const std::string& msg) { report.warnings.push_back(msg); };

  // Authenticity: needs both model answers and panel votes.
  std::map<int, std::vector<double>> auth_by_iteration;  // per-topic scores
  for (const auto& [key, questions] : model) {
    const auto& [topic, iteration] = key;
    auto panel_it = auth.find(key);
    if (panel_it == auth.end()) {
      warn("no authenticity ratings for topic '" + topic + "' iteration " +
           std::to_string(iteration));
      continue;
    }
    std::vector<int> model_vec, human_vec;
    std::size_t panel_only = 0;
    for (const auto& [qid, votes] : panel_it->second) {
      auto m = questions.find(qid);
      if (m == questions.end()) {
        ++panel_only;
        continue;
      }
      model_vec.push_back(m->second);
      human_vec.push_back(majority_rating(votes));
    }
    if (panel_only > 0 || panel_it->second.size() != questions.size()) {
      warn("question coverage mismatch for topic '" + topic + "' iteration " +
           std::to_string(iteration) + " (" + std::to_string(questions.size()) +
           " answers, " + std::to_string(panel_it->second.size()) + " rated)");
    }
    if (model_vec.empty()) continue;
    double score = 0.0;
    if (options.per_question_agreement) {
      std::size_t agree = 0;
      for (std::size_t i = 0; i < model_vec.size(); ++i) {
        if (model_vec[i] == human_vec[i]) ++agree;
      }
      score = static_cast<double>(agree) / static_cast<double>(model_vec.size());
    } else {
      score = cohen_kappa(model_vec, human_vec);
    }
    auth_by_iteration[iteration].push_back(score);
  }
  for (const auto& [key, questions] : auth) {
    if (model.find(key) == model.end()) {
      warn("no model answers for topic '" + key.first + "' iteration " +
           std::to_string(key.second));
    }
  }
  for (const auto& [iteration, scores] : auth_by_iteration) {
    report.authenticity.per_iteration[iteration] =
        std::accumulate(scores.begin(), scores.end(), 0.0) /
        static_cast<double>(scores.size());
  }

  // Rationality: panel only, majority per question then the mean.
  std::map<int, std::vector<int>> rat_by_iteration;
  for (const auto& [key, questions] : rat) {
    for (const auto& [qid, votes] : questions) {
      rat_by_iteration[key.second].push_back(majority_rating(votes));
    }
  }
  for (const auto& [iteration, majorities] : rat_by_iteration) {
    report.rationality.per_iteration[iteration] =
        std::accumulate(majorities.begin(), majorities.end(), 0.0) /
        static_cast<double>(majorities.size());
  }
  if (!rationality_panel.empty()) {
    for (const auto& [key, questions] : model) {
      if (rat_by_iteration.find(key.second) == rat_by_iteration.end()) {
        warn("no rationality scores for iteration " + std::to_string(key.second));
      }
    }
  }

  finish(report.authenticity);
  finish(report.rationality);
  return report;
}

namespace {

ordered_json summary_json(const MetricSummary& m) {
  ordered_json o;
  o["avg"] = to_json(m.avg);
  o["at_5"] = to_json(m.at_5);
  o["at_10"] = to_json(m.at_10);
  ordered_json per = ordered_json::object();
  for (const auto& [iteration, value] : m.per_iteration) {
    per[std::to_string(iteration)] = value;
  }
  o["per_iteration"] = std::move(per);
  return o;
}

}  // namespace

void write_report_json(const ReportData& report, const std::string& path) {
  ordered_json j;
  j["agent"] = report.agent;
  j["variant"] = report.variant;
  j["reference_note"] =
      "Published reference values for this protocol (iterative agent, article "
      "track: average authenticity 0.536, average rationality 4.118) come from "
      "closed-model runs scored by human annotator panels and are not "
      "reproducible by this harness.";
  j["authenticity"] = summary_json(report.authenticity);
  j["rationality"] = summary_json(report.rationality);
  j["warnings"] = report.warnings;
  write_file_atomic(path, j.dump(2) + "\n");
}

void write_report_csv(const ReportData& report, const std::string& path) {
  std::string csv = "agent,variant,iteration,authenticity,rationality\n";
  std::set<int> iterations;
  for (const auto& [i, v] : report.authenticity.per_iteration) iterations.insert(i);
  for (const auto& [i, v] : report.rationality.per_iteration) iterations.insert(i);
  char buf[64];
  for (int iteration : iterations) {
    csv += report.agent + "," + report.variant + "," + std::to_string(iteration) + ",";
    if (auto v = value_at(report.authenticity.per_iteration, iteration)) {
      std::snprintf(buf, sizeof(buf), "%.6f", *v);
      csv += buf;
    }
    csv += ",";
    if (auto v = value_at(report.rationality.per_iteration, iteration)) {
      std::snprintf(buf, sizeof(buf), "%.6f", *v);
      csv += buf;
    }
    csv += "\n";
  }
  write_file_atomic(path, csv);
}

}  // namespace cogbench
