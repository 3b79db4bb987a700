#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cogbench/bench.hpp"
#include "cogbench/memory.hpp"
#include "cogbench/metrics.hpp"
#include "cogbench/profile.hpp"
#include "cogbench/prompts.hpp"
#include "cogbench/provider.hpp"

namespace cogbench {

enum class AgentKind { coggpt, cot, react, reflexion };

std::string_view agent_kind_name(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);  // ConfigError on unknown

struct AgentState {
  AgentKind kind = AgentKind::coggpt;
  ProfileDoc profile;          // current; baselines never move off the initial one
  ProfileDoc initial_profile;
  Stm stm;
  LtmStore ltm;
  int iteration = 0;
};

struct QuestionAnswer {
  std::string question_id;
  int rating = 0;  // 1..5
  std::string reasoning;
  std::vector<std::string> recall_trace;  // recalled statements; empty for baselines
  std::string prompt_digest;
  std::string raw_reply;
  int retries = 0;
  // reflexion's extra self-reflection completion
  std::string reflect_prompt_digest;
  std::string reflect_raw_reply;
};

struct StepLog {
  std::string prompt_digest;
  std::string raw_reply;
  int retries = 0;
};

// One pass of the schedule: iteration 0 holds answers only; for the iterative
// agent, passes 1..T also carry the perceive/refine/distill step.
struct IterationRecord {
  int iteration = 0;
  bool refined = false;  // true when the pass ran the memory pipeline
  std::vector<std::string> batch_ids;
  std::string assessments;
  StepLog profile_update;
  StepLog distillation;
  std::size_t draft_count = 0;
  std::size_t retained_count = 0;
  std::size_t dropped_count = 0;
  std::size_t ltm_size = 0;
  std::vector<std::string> warnings;
  std::string profile_after;  // text form of the profile used for this pass
  std::vector<QuestionAnswer> answers;
};

struct SessionLog {
  std::string agent;
  std::string bench_name;
  std::string variant;
  std::string topic_id;
  std::string profile_name;
  std::size_t recall_k = 0;
  bool strict = true;
  std::uint64_t seed = 0;
  std::string provider_mode;
  std::size_t embedding_dim = 0;
  int iterations_planned = 0;
  std::size_t questions_per_pass = 0;

  bool complete = false;
  std::string error;  // set when a pass aborted the session

  std::vector<IterationRecord> records;  // t = 0 .. last finished pass
  std::map<std::string, std::size_t> completion_counts;  // by template tag
  std::string final_profile;
};

// Free-text feedback handed to react/reflexion. A record with an empty
// question_id applies to the whole iteration.
struct FeedbackRecord {
  int iteration = 0;
  std::string question_id;
  std::string text;
};

struct FeedbackLog {
  std::vector<FeedbackRecord> records;
};

// Reads {"records": [...]} or a bare array of {iteration, question_id?, text}.
FeedbackLog load_feedback(const std::string& path);

// Per-question entry wins over the iteration-level entry; first match each.
std::optional<std::string> feedback_for(const FeedbackLog& log, int iteration,
                                        const std::string& question_id);

struct BaselineTemplates {
  std::string cot;
  std::string react;
  std::string reflexion_reflect;
  std::string reflexion_answer;

  // Loads the four scaffold files from a directory. These are editable, so
  // there is no digest pinning, but each file must exist and be non-empty.
  static BaselineTemplates load(const std::string& dir);
};

struct SessionSpec {
  std::string topic_id;
  std::string profile_name;
  AgentKind kind = AgentKind::coggpt;
  std::size_t recall_k = 3;
  bool strict = true;
};

// Renders a list as "- item" lines; an empty list becomes the literal "None".
std::string bullet_block(const std::vector<std::string>& lines);

// Runs the perceive -> profile refine -> distill -> forget -> store pipeline
// for one batch. Parse failures retry the identical prompt once; the second
// failure throws. Answers are not part of the returned record.
IterationRecord run_iteration(AgentState& state, const std::vector<InfoItem>& batch,
                              Provider& provider, const TemplateSet& templates,
                              std::map<std::string, std::size_t>& completion_counts);

// Recall-augmented Likert answer for the iterative agent.
QuestionAnswer answer_question(AgentState& state, const Question& question,
                               std::size_t k, Provider& provider,
                               const TemplateSet& templates,
                               std::map<std::string, std::size_t>& completion_counts);

// One baseline answer. cot: one completion over (profile, batch, question).
// react: adds an Observation block carrying the previous pass's feedback.
// reflexion: a reflection completion over (previous answer, feedback), then
// the rating completion guided by that reflection. Always two completions.
QuestionAnswer baseline_answer(AgentState& state, const Question& question,
                               const std::vector<InfoItem>& batch,
                               const std::optional<std::string>& feedback_text,
                               const QuestionAnswer* previous,
                               const BaselineTemplates& baselines, Provider& provider,
                               std::map<std::string, std::size_t>& completion_counts);

// Full schedule: answers at t=0, then for t=1..T perceive/refine (iterative
// agent) or batch+feedback context (baselines) followed by the questionnaire.
// A pass-level abort stops the session; the partial log carries complete=false
// and the diagnostic. The log is a pure function of (benchmark, profile,
// transcript, config).
SessionLog run_session(const BenchmarkSet& bench, const SessionSpec& spec,
                       Provider& provider, const TemplateSet& templates,
                       const BaselineTemplates* baselines, const FeedbackLog* feedback,
                       AgentState* final_state = nullptr);

void write_session_log(const SessionLog& log, const std::string& path);

struct SessionAnswers {
  std::string agent;
  std::string variant;
  std::string topic_id;
  bool complete = false;
  std::vector<ModelAnswer> answers;
};

// Reads back the fields of session.json that evaluation needs.
SessionAnswers read_session_answers(const std::string& path);

}  // namespace cogbench
