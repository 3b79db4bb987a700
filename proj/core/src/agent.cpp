#include "cogbench/agent.hpp"

#include <filesystem>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "cogbench/util.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace cogbench {

std::string_view agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::coggpt:
      return "coggpt";
    case AgentKind::cot:
      return "cot";
    case AgentKind::react:
      return "react";
    case AgentKind::reflexion:
      return "reflexion";
  }
  return "coggpt";
}

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "coggpt") return AgentKind::coggpt;
  if (name == "cot") return AgentKind::cot;
  if (name == "react") return AgentKind::react;
  if (name == "reflexion") return AgentKind::reflexion;
  throw ConfigError("unknown agent kind '" + name +
                    "' (expected coggpt, cot, react or reflexion)");
}

std::string bullet_block(const std::vector<std::string>& lines) {
  if (lines.empty()) return "None";
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += "\n";
    out += "- " + lines[i];
  }
  return out;
}

FeedbackLog load_feedback(const std::string& path) {
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
  FeedbackLog log;
  for (std::size_t i = 0; i < records->size(); ++i) {
    const json& r = (*records)[i];
    const std::string where = path + ": " + base + "/" + std::to_string(i);
    if (!r.is_object()) throw ConfigError(where + ": expected object");
    FeedbackRecord rec;
    if (!r.contains("iteration") || !r["iteration"].is_number_integer() ||
        r["iteration"].get<int>() < 0) {
      throw ConfigError(where + "/iteration: expected integer >= 0");
    }
    rec.iteration = r["iteration"].get<int>();
    if (r.contains("question_id")) {
      if (!r["question_id"].is_string()) {
        throw ConfigError(where + "/question_id: expected string");
      }
      rec.question_id = r["question_id"].get<std::string>();
    }
    if (!r.contains("text") || !r["text"].is_string()) {
      throw ConfigError(where + "/text: expected string");
    }
    rec.text = r["text"].get<std::string>();
    log.records.push_back(std::move(rec));
  }
  return log;
}

std::optional<std::string> feedback_for(const FeedbackLog& log, int iteration,
                                        const std::string& question_id) {
  for (const auto& r : log.records) {
    if (r.iteration == iteration && r.question_id == question_id) return r.text;
  }
  for (const auto& r : log.records) {
    if (r.iteration == iteration && r.question_id.empty()) return r.text;
  }
  return std::nullopt;
}

BaselineTemplates BaselineTemplates::load(const std::string& dir) {
  auto read = [&](const char* name) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::string body = read_file(path);
    if (trim(body).empty()) throw ConfigError(path + ": template is empty");
    return body;
  };
  BaselineTemplates t;
  t.cot = read("cot.txt");
  t.react = read("react.txt");
  t.reflexion_reflect = read("reflexion_reflect.txt");
  t.reflexion_answer = read("reflexion_answer.txt");
  return t;
}

namespace {

std::string digest_of(const std::string& prompt) { return hex64(fnv1a64(prompt)); }

// One provider call. Every call is counted, retries included.
CompletionResult complete_counted(Provider& provider, const std::string& tag,
                                  const std::string& prompt, const std::string& context,
                                  std::map<std::string, std::size_t>& counts) {
  PromptRequest req;
  req.template_id = tag;
  req.text = prompt;
  req.temperature = 0.0;
  req.tag = context;
  counts[tag] += 1;
  return provider.complete(req);
}

// Completes and parses; a malformed reply retries the identical prompt once.
template <typename T, typename ParseFn>
T complete_parsed(Provider& provider, const std::string& tag, const std::string& prompt,
                  const std::string& context,
                  std::map<std::string, std::size_t>& counts, ParseFn parse,
                  StepLog& step) {
  step.prompt_digest = digest_of(prompt);
  CompletionResult first = complete_counted(provider, tag, prompt, context, counts);
  step.raw_reply = first.text;
  step.retries = 0;
  Result<T> parsed = parse(first.text);
  if (parsed) return parsed.take();

  CompletionResult second = complete_counted(provider, tag, prompt, context, counts);
  step.raw_reply = second.text;
  step.retries = 1;
  Result<T> reparsed = parse(second.text);
  if (reparsed) return reparsed.take();
  throw std::runtime_error(context + ": " + tag + " reply unusable after retry: " +
                           reparsed.error());
}

std::vector<std::string> item_texts(const std::vector<InfoItem>& batch) {
  std::vector<std::string> out;
  out.reserve(batch.size());
  for (const auto& item : batch) out.push_back(item.text);
  return out;
}

std::vector<std::string> item_ids(const std::vector<InfoItem>& batch) {
  std::vector<std::string> out;
  out.reserve(batch.size());
  for (const auto& item : batch) out.push_back(item.id);
  return out;
}

}  // namespace

IterationRecord run_iteration(AgentState& state, const std::vector<InfoItem>& batch,
                              Provider& provider, const TemplateSet& templates,
                              std::map<std::string, std::size_t>& completion_counts) {
  if (state.kind != AgentKind::coggpt) {
    throw std::logic_error("run_iteration: only the iterative agent refines memory");
  }
  const int t = state.iteration + 1;
  const std::string context = "iteration " + std::to_string(t);

  IterationRecord rec;
  rec.iteration = t;
  rec.refined = true;
  rec.batch_ids = item_ids(batch);

  std::vector<StmItem> stm_items;
  stm_items.reserve(batch.size());
  for (const auto& item : batch) stm_items.push_back({item.id, item.text});
  stm_ingest(state.stm, stm_items, t);
  const std::string stm_block = bullet_block(item_texts(batch));

  // Collaborative refinement: the reply's profile replaces the current one.
  const std::string update_prompt =
      render_template(templates.body(TemplateId::profile_update),
                      {{"profile", state.profile.to_text()}, {"memory", stm_block}});
  ParsedProfileUpdate update = complete_parsed<ParsedProfileUpdate>(
      provider, "profile_update", update_prompt, context, completion_counts,
      [](const std::string& text) { return parse_profile_update(text); },
      rec.profile_update);
  rec.assessments = update.assessments;
  for (auto& w : update.warnings) rec.warnings.push_back(std::move(w));
  state.profile = std::move(update.updated_profile);

  // Distillation runs against the refined profile.
  const std::string distill_prompt =
      render_template(templates.body(TemplateId::knowledge_distill),
                      {{"profile", state.profile.to_text()}, {"memory", stm_block}});
  std::vector<KnowledgeDraft> drafts = complete_parsed<std::vector<KnowledgeDraft>>(
      provider, "knowledge_distill", distill_prompt, context, completion_counts,
      [](const std::string& text) { return parse_knowledge_list(text); },
      rec.distillation);

  CommitOutcome outcome = commit_knowledge(drafts);
  rec.draft_count = drafts.size();
  rec.retained_count = outcome.retained.size();
  rec.dropped_count = outcome.dropped.size();

  ltm_store(state.ltm, outcome.retained,
            [&](const std::string& text) { return provider.embed(text); }, t,
            rec.batch_ids);
  rec.ltm_size = state.ltm.items.size();

  clear_stm(state.stm);
  state.iteration = t;
  rec.profile_after = state.profile.to_text();
  return rec;
}

QuestionAnswer answer_question(AgentState& state, const Question& question,
                               std::size_t k, Provider& provider,
                               const TemplateSet& templates,
                               std::map<std::string, std::size_t>& completion_counts) {
  const std::string context =
      "t" + std::to_string(state.iteration) + "/" + question.id;

  QuestionAnswer answer;
  answer.question_id = question.id;

  RecallResult recalled =
      recall(state.ltm, question.statement, k == 0 ? 1 : k,
             [&](const std::string& text) { return provider.embed(text); });
  for (const auto& hit : recalled.hits) {
    answer.recall_trace.push_back(state.ltm.items[hit.item_index].statement);
  }

  const std::string prompt =
      render_template(templates.body(TemplateId::interpret),
                      {{"profile", state.profile.to_text()},
                       {"memory", bullet_block(answer.recall_trace)},
                       {"question", question.statement}});
  StepLog step;
  ParsedInterpretation parsed = complete_parsed<ParsedInterpretation>(
      provider, "interpret", prompt, context, completion_counts,
      [](const std::string& text) { return parse_interpretation(text); }, step);
  answer.rating = parsed.rating;
  answer.reasoning = parsed.thoughts;
  answer.prompt_digest = step.prompt_digest;
  answer.raw_reply = step.raw_reply;
  answer.retries = step.retries;
  return answer;
}

QuestionAnswer baseline_answer(AgentState& state, const Question& question,
                               const std::vector<InfoItem>& batch,
                               const std::optional<std::string>& feedback_text,
                               const QuestionAnswer* previous,
                               const BaselineTemplates& baselines, Provider& provider,
                               std::map<std::string, std::size_t>& completion_counts) {
  const std::string context =
      "t" + std::to_string(state.iteration) + "/" + question.id;
  const std::string profile_text = state.initial_profile.to_text();
  const std::string information = bullet_block(item_texts(batch));
  const std::string observation = feedback_text ? *feedback_text : "None";

  QuestionAnswer answer;
  answer.question_id = question.id;

  std::string tag;
  std::string prompt;
  switch (state.kind) {
    case AgentKind::cot:
      tag = "cot";
      prompt = render_template(baselines.cot, {{"profile", profile_text},
                                               {"information", information},
                                               {"question", question.statement}});
      break;
    case AgentKind::react:
      tag = "react";
      prompt = render_template(baselines.react, {{"profile", profile_text},
                                                 {"information", information},
                                                 {"observation", observation},
                                                 {"question", question.statement}});
      break;
    case AgentKind::reflexion: {
      tag = "reflexion_answer";
      const std::string previous_answer =
          previous ? "Thoughts: " + previous->reasoning +
                         "\nRating: " + std::to_string(previous->rating)
                   : "None";
      const std::string reflect_prompt =
          render_template(baselines.reflexion_reflect,
                          {{"profile", profile_text},
                           {"question", question.statement},
                           {"previous_answer", previous_answer},
                           {"feedback", observation}});
      answer.reflect_prompt_digest = digest_of(reflect_prompt);
      CompletionResult reflection = complete_counted(
          provider, "reflexion_reflect", reflect_prompt, context, completion_counts);
      answer.reflect_raw_reply = reflection.text;
      prompt = render_template(baselines.reflexion_answer,
                               {{"profile", profile_text},
                                {"information", information},
                                {"reflection", trim(reflection.text)},
                                {"question", question.statement}});
      break;
    }
    case AgentKind::coggpt:
      throw std::logic_error("baseline_answer: iterative agent uses answer_question");
  }

  StepLog step;
  ParsedInterpretation parsed = complete_parsed<ParsedInterpretation>(
      provider, tag, prompt, context, completion_counts,
      [](const std::string& text) { return parse_interpretation(text); }, step);
  answer.rating = parsed.rating;
  answer.reasoning = parsed.thoughts;
  answer.prompt_digest = step.prompt_digest;
  answer.raw_reply = step.raw_reply;
  answer.retries = step.retries;
  return answer;
}

SessionLog run_session(const BenchmarkSet& bench, const SessionSpec& spec,
                       Provider& provider, const TemplateSet& templates,
                       const BaselineTemplates* baselines, const FeedbackLog* feedback,
                       AgentState* final_state) {
  const Questionnaire* questionnaire = bench.find_questionnaire(spec.topic_id);
  if (!questionnaire) {
    throw ConfigError("no questionnaire for topic '" + spec.topic_id + "'");
  }
  const NamedProfile* profile = bench.find_profile(spec.profile_name);
  if (!profile) {
    throw ConfigError("no profile named '" + spec.profile_name + "'");
  }
  if (spec.kind != AgentKind::coggpt && !baselines) {
    throw ConfigError("baseline agent requires the baseline template set");
  }
  if (spec.recall_k == 0) throw ConfigError("recall_k must be >= 1");

  IterationPlan plan = plan_iterations(bench, spec.topic_id, spec.strict);
  const std::vector<InfoItem>& flow = bench.flows.at(spec.topic_id);
  std::map<std::string, const InfoItem*> items_by_id;
  for (const auto& item : flow) items_by_id[item.id] = &item;

  SessionLog log;
  log.agent = std::string(agent_kind_name(spec.kind));
  log.bench_name = bench.name;
  log.variant = std::string(variant_name(bench.variant));
  log.topic_id = spec.topic_id;
  log.profile_name = spec.profile_name;
  log.recall_k = spec.recall_k;
  log.strict = spec.strict;
  log.seed = provider.config().seed;
  log.provider_mode =
      provider.config().mode == ProviderMode::replay ? "replay" : "live";
  log.embedding_dim = provider.config().embedding_dim;
  log.iterations_planned = plan.iterations();
  log.questions_per_pass = questionnaire->questions.size();

  AgentState state;
  state.kind = spec.kind;
  state.profile = profile->doc;
  state.initial_profile = profile->doc;

  std::vector<QuestionAnswer> previous_answers;

  auto answer_pass = [&](int t, const std::vector<InfoItem>& batch)
      -> std::vector<QuestionAnswer> {
    std::vector<QuestionAnswer> answers;
    for (const auto& question : questionnaire->questions) {
      if (spec.kind == AgentKind::coggpt) {
        answers.push_back(answer_question(state, question, spec.recall_k, provider,
                                          templates, log.completion_counts));
      } else {
        std::optional<std::string> fb;
        if (feedback && t >= 1) fb = feedback_for(*feedback, t - 1, question.id);
        const QuestionAnswer* prev = nullptr;
        for (const auto& a : previous_answers) {
          if (a.question_id == question.id) {
            prev = &a;
            break;
          }
        }
        answers.push_back(baseline_answer(state, question, batch, fb, prev,
                                          *baselines, provider,
                                          log.completion_counts));
      }
    }
    return answers;
  };

  try {
    IterationRecord zeroth;
    zeroth.iteration = 0;
    zeroth.profile_after = state.profile.to_text();
    zeroth.ltm_size = 0;
    zeroth.answers = answer_pass(0, {});
    previous_answers = zeroth.answers;
    log.records.push_back(std::move(zeroth));

    for (int t = 1; t <= plan.iterations(); ++t) {
      std::vector<InfoItem> batch;
      for (const auto& id : plan.batches[static_cast<std::size_t>(t - 1)]) {
        batch.push_back(*items_by_id.at(id));
      }
      IterationRecord rec;
      if (spec.kind == AgentKind::coggpt) {
        rec = run_iteration(state, batch, provider, templates, log.completion_counts);
      } else {
        rec.iteration = t;
        rec.batch_ids = item_ids(batch);
        rec.profile_after = state.initial_profile.to_text();
        state.iteration = t;
      }
      rec.answers = answer_pass(t, batch);
      previous_answers = rec.answers;
      log.records.push_back(std::move(rec));
    }
    log.complete = true;
  } catch (const std::exception& e) {
    log.complete = false;
    log.error = e.what();
  }

  log.final_profile = state.profile.to_text();
  if (final_state) *final_state = std::move(state);
  return log;
}

namespace {

ordered_json step_json(const StepLog& step) {
  ordered_json j;
  j["prompt_digest"] = step.prompt_digest;
  j["raw_reply"] = step.raw_reply;
  j["retries"] = step.retries;
  return j;
}

ordered_json answer_json(const QuestionAnswer& a) {
  ordered_json j;
  j["question_id"] = a.question_id;
  j["rating"] = a.rating;
  j["reasoning"] = a.reasoning;
  j["recall_trace"] = a.recall_trace;
  j["prompt_digest"] = a.prompt_digest;
  j["raw_reply"] = a.raw_reply;
  j["retries"] = a.retries;
  if (!a.reflect_prompt_digest.empty()) {
    j["reflect_prompt_digest"] = a.reflect_prompt_digest;
    j["reflect_raw_reply"] = a.reflect_raw_reply;
  }
  return j;
}

}  // namespace

void write_session_log(const SessionLog& log, const std::string& path) {
  ordered_json config;
  config["agent"] = log.agent;
  config["bench_name"] = log.bench_name;
  config["variant"] = log.variant;
  config["topic_id"] = log.topic_id;
  config["profile_name"] = log.profile_name;
  config["recall_k"] = log.recall_k;
  config["strict"] = log.strict;
  config["seed"] = log.seed;
  config["provider_mode"] = log.provider_mode;
  config["embedding_dim"] = log.embedding_dim;
  config["iterations_planned"] = log.iterations_planned;
  config["questions_per_pass"] = log.questions_per_pass;

  ordered_json records = ordered_json::array();
  for (const auto& rec : log.records) {
    ordered_json r;
    r["iteration"] = rec.iteration;
    if (rec.refined) {
      r["batch"] = rec.batch_ids;
      r["assessments"] = rec.assessments;
      r["profile_update"] = step_json(rec.profile_update);
      r["distillation"] = step_json(rec.distillation);
      r["drafts"] = rec.draft_count;
      r["retained"] = rec.retained_count;
      r["dropped"] = rec.dropped_count;
      r["ltm_size"] = rec.ltm_size;
      r["warnings"] = rec.warnings;
    } else if (!rec.batch_ids.empty()) {
      r["batch"] = rec.batch_ids;
    }
    r["profile_after"] = rec.profile_after;
    ordered_json answers = ordered_json::array();
    for (const auto& a : rec.answers) answers.push_back(answer_json(a));
    r["answers"] = std::move(answers);
    records.push_back(std::move(r));
  }

  ordered_json counts = ordered_json::object();
  for (const auto& [tag, n] : log.completion_counts) counts[tag] = n;

  ordered_json j;
  j["config"] = std::move(config);
  j["complete"] = log.complete;
  j["error"] = log.error.empty() ? ordered_json(nullptr) : ordered_json(log.error);
  j["records"] = std::move(records);
  j["completion_counts"] = std::move(counts);
  j["final_profile"] = log.final_profile;
  write_file_atomic(path, j.dump(2) + "\n");
}

SessionAnswers read_session_answers(const std::string& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + ": not valid JSON");
  if (!doc.is_object() || !doc.contains("config") || !doc["config"].is_object()) {
    throw ConfigError(path + ": missing config object");
  }
  const json& config = doc["config"];
  auto config_string = [&](const char* key) {
    if (!config.contains(key) || !config[key].is_string()) {
      throw ConfigError(path + ": /config/" + key + ": expected string");
    }
    return config[key].get<std::string>();
  };

  SessionAnswers out;
  out.agent = config_string("agent");
  out.variant = config_string("variant");
  out.topic_id = config_string("topic_id");
  out.complete = doc.value("complete", false);

  if (!doc.contains("records") || !doc["records"].is_array()) {
    throw ConfigError(path + ": missing records array");
  }
  const json& records = doc["records"];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    const std::string where = path + ": /records/" + std::to_string(i);
    if (!rec.is_object() || !rec.contains("iteration") ||
        !rec["iteration"].is_number_integer()) {
      throw ConfigError(where + ": expected object with integer iteration");
    }
    const int iteration = rec["iteration"].get<int>();
    if (!rec.contains("answers") || !rec["answers"].is_array()) {
      throw ConfigError(where + ": missing answers array");
    }
    for (std::size_t k = 0; k < rec["answers"].size(); ++k) {
      const json& a = rec["answers"][k];
      const std::string awhere = where + "/answers/" + std::to_string(k);
      if (!a.is_object() || !a.contains("question_id") ||
          !a["question_id"].is_string() || !a.contains("rating") ||
          !a["rating"].is_number_integer()) {
        throw ConfigError(awhere + ": expected question_id and integer rating");
      }
      ModelAnswer answer;
      answer.topic_id = out.topic_id;
      answer.iteration = iteration;
      answer.question_id = a["question_id"].get<std::string>();
      answer.rating = a["rating"].get<int>();
      if (answer.rating < 1 || answer.rating > 5) {
        throw ConfigError(awhere + "/rating: outside 1..5");
      }
      out.answers.push_back(std::move(answer));
    }
  }
  return out;
}

}  // namespace cogbench
