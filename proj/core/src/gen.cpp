#include "cogbench/gen.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "cogbench/util.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace cogbench {

namespace {

CompletionResult complete_once(Provider& provider, const std::string& tag,
                               const std::string& prompt) {
  PromptRequest req;
  req.template_id = tag;
  req.text = prompt;
  req.temperature = 0.0;
  req.tag = tag;
  return provider.complete(req);
}

}  // namespace

OpinionSet generate_opinion_set(const std::string& topic, Provider& provider,
                                const TemplateSet& templates) {
  const std::string prompt = render_template(
      templates.body(TemplateId::questionnaire_design), {{"topic", topic}});
  CompletionResult reply = complete_once(provider, "questionnaire_design", prompt);
  Result<OpinionSet> parsed = parse_opinion_set(reply.text);
  if (!parsed) {
    throw std::runtime_error("opinion reply for topic '" + topic +
                             "' unusable: " + parsed.error());
  }
  OpinionSet set = parsed.take();
  if (set.entries.size() != 10) {
    set.warnings.push_back("expected 10 opinions, got " +
                           std::to_string(set.entries.size()));
  }
  return set;
}

std::vector<SupporterRank> rank_supporters(const std::vector<OpinionSet>& sets) {
  std::vector<SupporterRank> out;  // first-appearance order while counting
  std::map<std::string, std::size_t> index;
  for (const auto& set : sets) {
    for (const auto& entry : set.entries) {
      for (const auto& raw : entry.supporters) {
        const std::string name = normalize_token(raw);
        if (name.empty()) continue;
        auto it = index.find(name);
        if (it == index.end()) {
          index.emplace(name, out.size());
          out.push_back({name, 1, 0});
        } else {
          out[it->second].mentions += 1;
        }
      }
    }
  }
  // Dense ranks by descending mentions; the stable sort keeps first-appearance
  // order within a tie.
  std::stable_sort(out.begin(), out.end(),
                   [](const SupporterRank& a, const SupporterRank& b) {
                     return a.mentions > b.mentions;
                   });
  int rank = 0;
  std::size_t previous_mentions = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i == 0 || out[i].mentions != previous_mentions) ++rank;
    out[i].rank = rank;
    previous_mentions = out[i].mentions;
  }
  return out;
}

ProfileDoc generate_profile(const std::string& character, Provider& provider,
                            const TemplateSet& templates,
                            std::vector<std::string>* warnings) {
  const std::string prompt = render_template(
      templates.body(TemplateId::profile_create), {{"character", character}});
  CompletionResult reply = complete_once(provider, "profile_create", prompt);
  ProfileParseStats stats;
  ProfileDoc doc = parse_profile_lines(reply.text, &stats);
  if (stats.canonical_recovered < 10) {
    throw std::runtime_error("profile reply for '" + character + "' recovered only " +
                             std::to_string(stats.canonical_recovered) + " of " +
                             std::to_string(kCanonicalProfileKeyCount) +
                             " canonical keys");
  }
  if (warnings) {
    for (auto& w : stats.warnings) warnings->push_back(std::move(w));
  }
  return doc;
}

void export_review_sheet(const std::string& topic_id, const OpinionSet& set,
                         const std::string& path) {
  ordered_json j;
  j["topic_id"] = topic_id;
  j["entries"] = ordered_json::array();
  for (const auto& entry : set.entries) {
    ordered_json e;
    e["number"] = entry.number;
    e["perspective"] = entry.perspective;
    e["opinion"] = entry.opinion;
    e["supporters"] = entry.supporters;
    e["reasons"] = entry.reasons;
    ordered_json flags;
    flags["relevance"] = nullptr;
    flags["distinctiveness"] = nullptr;
    flags["clarity"] = nullptr;
    flags["contextual_truth"] = nullptr;
    e["flags"] = std::move(flags);
    j["entries"].push_back(std::move(e));
  }
  write_file_atomic(path, j.dump(2) + "\n");
}

Questionnaire import_review_sheet(const std::string& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + ": not valid JSON");
  if (!doc.is_object() || !doc.contains("topic_id") || !doc["topic_id"].is_string()) {
    throw ConfigError(path + ": missing topic_id");
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw ConfigError(path + ": missing entries array");
  }

  Questionnaire q;
  q.topic_id = doc["topic_id"].get<std::string>();

  static const char* kFlagNames[] = {"relevance", "distinctiveness", "clarity",
                                     "contextual_truth"};
  const json& entries = doc["entries"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    const std::string where = path + ": /entries/" + std::to_string(i);
    if (!e.is_object()) throw ConfigError(where + ": expected object");
    if (!e.contains("number") || !e["number"].is_number_integer()) {
      throw ConfigError(where + "/number: expected integer");
    }
    if (!e.contains("opinion") || !e["opinion"].is_string()) {
      throw ConfigError(where + "/opinion: expected string");
    }
    if (!e.contains("flags") || !e["flags"].is_object()) {
      throw ConfigError(where + "/flags: expected object");
    }
    const json& flags = e["flags"];
    bool accepted = true;
    for (const char* name : kFlagNames) {
      if (!flags.contains(name)) {
        throw ConfigError(where + "/flags/" + name + ": missing");
      }
      const json& v = flags[name];
      if (v.is_null()) {
        accepted = false;
      } else if (v.is_boolean()) {
        accepted = accepted && v.get<bool>();
      } else {
        throw ConfigError(where + "/flags/" + name +
                          ": expected null, true or false");
      }
    }
    if (!accepted) continue;

    Question question;
    question.topic_id = q.topic_id;
    question.id = "q" + std::to_string(e["number"].get<int>());
    question.statement = e["opinion"].get<std::string>();
    for (const auto& existing : q.questions) {
      if (existing.id == question.id) {
        throw ConfigError(where + "/number: duplicate accepted entry number " +
                          std::to_string(e["number"].get<int>()));
      }
    }
    q.questions.push_back(std::move(question));
  }
  return q;
}

}  // namespace cogbench
