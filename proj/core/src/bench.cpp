#include "cogbench/bench.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "cogbench/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace cogbench {
namespace {

[[noreturn]] void schema_error(const std::string& file, const std::string& ptr,
                               const std::string& msg) {
  throw ConfigError(file + ": " + ptr + ": " + msg);
}

json parse_json_file(const std::string& file) {
  json j = json::parse(read_file(file), nullptr, false);
  if (j.is_discarded()) throw ConfigError(file + ": not valid JSON");
  return j;
}

const json& require_key(const json& j, const char* key, const std::string& file,
                        const std::string& ptr) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(file, ptr + "/" + key, "missing key");
  return *it;
}

std::string require_string(const json& j, const char* key, const std::string& file,
                           const std::string& ptr) {
  const json& v = require_key(j, key, file, ptr);
  if (!v.is_string()) schema_error(file, ptr + "/" + key, "expected string");
  return v.get<std::string>();
}

BenchVariant parse_variant(const std::string& s, const std::string& file,
                           const std::string& ptr) {
  if (s == "a") return BenchVariant::a;
  if (s == "v") return BenchVariant::v;
  schema_error(file, ptr, "unknown variant '" + s + "' (expected \"a\" or \"v\")");
}

Modality parse_modality(const std::string& s, const std::string& file,
                        const std::string& ptr) {
  if (s == "article") return Modality::article;
  if (s == "video_text") return Modality::video_text;
  schema_error(file, ptr, "unknown modality '" + s + "'");
}

// Orders flow files so 2.json sorts before 10.json.
bool natural_less(const fs::path& a, const fs::path& b) {
  const std::string sa = a.stem().string(), sb = b.stem().string();
  auto numeric = [](const std::string& s) {
    return !s.empty() && s.size() <= 18 &&
           std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
  };
  if (numeric(sa) && numeric(sb)) {
    unsigned long long na = std::stoull(sa), nb = std::stoull(sb);
    if (na != nb) return na < nb;
  }
  return a.filename() < b.filename();
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext,
                                 bool natural) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  if (natural) {
    std::sort(out.begin(), out.end(), natural_less);
  } else {
    std::sort(out.begin(), out.end());
  }
  return out;
}

Questionnaire load_questionnaire(const fs::path& file) {
  const std::string fname = file.string();
  json j = parse_json_file(fname);
  if (!j.is_object()) schema_error(fname, "", "expected object");
  Questionnaire q;
  q.topic_id = require_string(j, "topic_id", fname, "");
  if (q.topic_id.empty()) schema_error(fname, "/topic_id", "must be non-empty");
  const json& questions = require_key(j, "questions", fname, "");
  if (!questions.is_array()) schema_error(fname, "/questions", "expected array");
  if (questions.empty()) schema_error(fname, "/questions", "must be non-empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const std::string ptr = "/questions/" + std::to_string(i);
    const json& qj = questions[i];
    if (!qj.is_object()) schema_error(fname, ptr, "expected object");
    Question question;
    question.topic_id = q.topic_id;
    question.id = require_string(qj, "id", fname, ptr);
    question.statement = require_string(qj, "statement", fname, ptr);
    if (question.id.empty()) schema_error(fname, ptr + "/id", "must be non-empty");
    if (!seen.insert(question.id).second) {
      schema_error(fname, ptr + "/id", "duplicate question id '" + question.id + "'");
    }
    q.questions.push_back(std::move(question));
  }
  return q;
}

InfoItem load_info_item(const fs::path& file, const std::string& topic_id,
                        BenchVariant variant) {
  const std::string fname = file.string();
  json j = parse_json_file(fname);
  if (!j.is_object()) schema_error(fname, "", "expected object");
  InfoItem item;
  item.topic_id = topic_id;
  item.id = require_string(j, "id", fname, "");
  if (item.id.empty()) schema_error(fname, "/id", "must be non-empty");
  item.category = require_string(j, "category", fname, "");
  item.modality = parse_modality(require_string(j, "modality", fname, ""), fname,
                                 "/modality");
  const Modality expected =
      variant == BenchVariant::a ? Modality::article : Modality::video_text;
  if (item.modality != expected) {
    schema_error(fname, "/modality",
                 std::string("modality '") + std::string(modality_name(item.modality)) +
                     "' does not match benchmark variant '" +
                     std::string(variant_name(variant)) + "'");
  }
  item.text = require_string(j, "text", fname, "");
  item.word_count = word_count(item.text);
  return item;
}

}  // namespace

std::string_view variant_name(BenchVariant v) {
  return v == BenchVariant::a ? "a" : "v";
}

std::string_view modality_name(Modality m) {
  return m == Modality::article ? "article" : "video_text";
}

std::size_t batch_size_for(BenchVariant v) {
  return v == BenchVariant::a ? 1u : 10u;
}

const Questionnaire* BenchmarkSet::find_questionnaire(const std::string& topic_id) const {
  for (const auto& q : questionnaires) {
    if (q.topic_id == topic_id) return &q;
  }
  return nullptr;
}

const NamedProfile* BenchmarkSet::find_profile(const std::string& name_) const {
  for (const auto& p : profiles) {
    if (p.name == name_) return &p;
  }
  return nullptr;
}

BenchmarkSet load_benchmark(const std::string& path) {
  const fs::path root(path);
  if (!fs::exists(root)) throw ConfigError("benchmark root not found: " + path);
  const fs::path bench_file = root / "bench.json";
  if (!fs::exists(bench_file)) throw ConfigError("missing " + bench_file.string());

  BenchmarkSet bench;
  {
    const std::string fname = bench_file.string();
    json j = parse_json_file(fname);
    if (!j.is_object()) schema_error(fname, "", "expected object");
    bench.name = require_string(j, "name", fname, "");
    bench.variant = parse_variant(require_string(j, "variant", fname, ""), fname,
                                  "/variant");
  }

  for (const auto& file : list_files(root / "questionnaires", ".json", false)) {
    Questionnaire q = load_questionnaire(file);
    if (bench.find_questionnaire(q.topic_id)) {
      throw ConfigError(file.string() + ": duplicate topic_id '" + q.topic_id + "'");
    }
    bench.questionnaires.push_back(std::move(q));
  }
  if (bench.questionnaires.empty()) {
    throw ConfigError(path + ": no questionnaires found");
  }

  for (const auto& file : list_files(root / "profiles", ".txt", false)) {
    NamedProfile p;
    p.name = file.stem().string();
    p.doc = parse_profile_lines(read_file(file.string()));
    bench.profiles.push_back(std::move(p));
  }

  const fs::path flows_dir = root / "flows";
  if (fs::exists(flows_dir)) {
    std::vector<fs::path> topic_dirs;
    for (const auto& e : fs::directory_iterator(flows_dir)) {
      if (e.is_directory()) topic_dirs.push_back(e.path());
    }
    std::sort(topic_dirs.begin(), topic_dirs.end());
    for (const auto& dir : topic_dirs) {
      const std::string topic_id = dir.filename().string();
      std::vector<InfoItem> items;
      std::set<std::string> seen;
      for (const auto& file : list_files(dir, ".json", true)) {
        InfoItem item = load_info_item(file, topic_id, bench.variant);
        if (!seen.insert(item.id).second) {
          throw ConfigError(file.string() + ": duplicate info item id '" + item.id +
                            "' in topic '" + topic_id + "'");
        }
        items.push_back(std::move(item));
      }
      bench.flows.emplace(topic_id, std::move(items));
    }
  }
  return bench;
}

void save_benchmark(const BenchmarkSet& bench, const std::string& path) {
  const fs::path root(path);
  fs::create_directories(root / "questionnaires");
  fs::create_directories(root / "profiles");

  {
    ordered_json j;
    j["name"] = bench.name;
    j["variant"] = std::string(variant_name(bench.variant));
    write_file_atomic((root / "bench.json").string(), j.dump(2) + "\n");
  }

  for (const auto& q : bench.questionnaires) {
    ordered_json j;
    j["topic_id"] = q.topic_id;
    j["questions"] = ordered_json::array();
    for (const auto& question : q.questions) {
      ordered_json qj;
      qj["id"] = question.id;
      qj["statement"] = question.statement;
      j["questions"].push_back(std::move(qj));
    }
    write_file_atomic((root / "questionnaires" / (q.topic_id + ".json")).string(),
                      j.dump(2) + "\n");
  }

  for (const auto& p : bench.profiles) {
    write_file_atomic((root / "profiles" / (p.name + ".txt")).string(),
                      p.doc.to_text());
  }

  for (const auto& [topic_id, items] : bench.flows) {
    const fs::path dir = root / "flows" / topic_id;
    fs::create_directories(dir);
    std::size_t index = 0;
    for (const auto& item : items) {
      ordered_json j;
      j["id"] = item.id;
      j["category"] = item.category;
      j["modality"] = std::string(modality_name(item.modality));
      j["text"] = item.text;
      char name[16];
      std::snprintf(name, sizeof(name), "%03zu.json", ++index);
      write_file_atomic((dir / name).string(), j.dump(2) + "\n");
    }
  }
}

IterationPlan plan_iterations(const BenchmarkSet& bench, const std::string& topic_id,
                              bool strict) {
  auto it = bench.flows.find(topic_id);
  if (it == bench.flows.end()) {
    throw ConfigError("no information flow for topic '" + topic_id + "'");
  }
  const std::vector<InfoItem>& items = it->second;
  const std::size_t batch = batch_size_for(bench.variant);

  IterationPlan plan;
  plan.topic_id = topic_id;
  for (std::size_t start = 0; start < items.size(); start += batch) {
    std::vector<std::string> ids;
    for (std::size_t i = start; i < std::min(start + batch, items.size()); ++i) {
      ids.push_back(items[i].id);
    }
    plan.batches.push_back(std::move(ids));
  }

  if (strict) {
    if (items.size() % batch != 0) {
      throw ConfigError("topic '" + topic_id + "': " + std::to_string(items.size()) +
                        " items do not divide into full batches of " +
                        std::to_string(batch));
    }
    if (plan.iterations() != kCanonicalIterations) {
      throw ConfigError("topic '" + topic_id + "': expected " +
                        std::to_string(kCanonicalIterations) + " iterations, got " +
                        std::to_string(plan.iterations()));
    }
  }
  return plan;
}

StatsTable corpus_stats(const BenchmarkSet& bench) {
  StatsTable table;
  for (const auto& [topic_id, items] : bench.flows) {
    for (const auto& item : items) {
      CategoryStats& cat = table.per_category[item.category];
      cat.items += 1;
      cat.total_words += item.word_count;
      table.overall.items += 1;
      table.overall.total_words += item.word_count;
    }
  }
  auto finish = [](CategoryStats& c) {
    c.mean_words = c.items == 0
                       ? 0.0
                       : static_cast<double>(c.total_words) / static_cast<double>(c.items);
  };
  for (auto& [name, cat] : table.per_category) finish(cat);
  finish(table.overall);
  return table;
}

ValidationReport validate_benchmark(const BenchmarkSet& bench) {
  ValidationReport report;
  auto add = [&](std::string where, std::string what) {
    report.violations.push_back({std::move(where), std::move(what)});
  };

  const std::size_t expected_items =
      batch_size_for(bench.variant) * static_cast<std::size_t>(kCanonicalIterations);

  for (const auto& q : bench.questionnaires) {
    if (bench.flows.find(q.topic_id) == bench.flows.end()) {
      add("questionnaires/" + q.topic_id, "no information flow for this topic");
    }
    for (const auto& question : q.questions) {
      if (trim(question.statement).empty()) {
        add("questionnaires/" + q.topic_id, "question '" + question.id + "' is empty");
      }
    }
  }

  for (const auto& [topic_id, items] : bench.flows) {
    if (!bench.find_questionnaire(topic_id)) {
      add("flows/" + topic_id, "no questionnaire for this topic");
    }
    if (items.size() != expected_items) {
      add("flows/" + topic_id,
          "expected " + std::to_string(expected_items) + " items for variant '" +
              std::string(variant_name(bench.variant)) + "', found " +
              std::to_string(items.size()));
    }
    for (const auto& item : items) {
      if (trim(item.text).empty()) {
        add("flows/" + topic_id, "item '" + item.id + "' has empty text");
      }
    }
  }

  for (const auto& p : bench.profiles) {
    for (const auto& key : p.doc.missing_canonical()) {
      add("profiles/" + p.name, "missing canonical key '" + key + "'");
    }
    for (const auto& [key, value] : p.doc.attributes) {
      if (!canonical_profile_key(key).empty() && trim(value).empty()) {
        add("profiles/" + p.name, "canonical key '" + key + "' is empty");
      }
    }
  }
  return report;
}

}  // namespace cogbench
