// Command-line front end: run sessions, evaluate logs against human panels,
// generate benchmark pieces, validate corpora, print stats, inspect
// transcripts. Exit codes: 0 success, 1 runtime/eval failure, 2 usage/config.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cogbench/agent.hpp"
#include "cogbench/bench.hpp"
#include "cogbench/gen.hpp"
#include "cogbench/metrics.hpp"
#include "cogbench/prompts.hpp"
#include "cogbench/provider.hpp"
#include "cogbench/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace cogbench;

namespace {

struct ProviderFlags {
  std::string provider = "replay";
  std::string transcript;
  std::string endpoint;
  std::string model = "gpt-4-0613";
  std::string embedding_model = "text-embedding-ada-002";
  std::size_t embedding_dim = 1536;
  std::string api_key_env = "COGBENCH_API_KEY";
  std::uint64_t seed = 0;
  int max_inflight = 0;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--provider", provider, "Completion backend: replay or live")
        ->check(CLI::IsMember({"replay", "live"}));
    cmd->add_option("--transcript", transcript,
                    "Replay transcript file, or a directory holding one per topic");
    cmd->add_option("--endpoint", endpoint, "Live API base URL");
    cmd->add_option("--model", model, "Live chat model name");
    cmd->add_option("--embedding-model", embedding_model, "Live embedding model name");
    cmd->add_option("--embedding-dim", embedding_dim, "Embedding dimensionality");
    cmd->add_option("--api-key-env", api_key_env,
                    "Environment variable holding the API credential");
    cmd->add_option("--seed", seed, "Replay pseudo-embedding seed");
    cmd->add_option("--max-inflight", max_inflight,
                    "Cap on concurrent live requests (0 = unlimited)");
  }

  ProviderConfig to_config(const std::string& transcript_path) const {
    ProviderConfig cfg;
    cfg.mode = provider == "live" ? ProviderMode::live : ProviderMode::replay;
    cfg.endpoint = endpoint;
    cfg.model = model;
    cfg.embedding_model = embedding_model;
    cfg.embedding_dim = embedding_dim;
    cfg.api_key_env = api_key_env;
    cfg.seed = seed;
    cfg.max_inflight = max_inflight;
    cfg.transcript_path = transcript_path;
    if (cfg.mode == ProviderMode::replay && cfg.transcript_path.empty()) {
      throw ConfigError("replay mode needs --transcript");
    }
    if (cfg.mode == ProviderMode::live && cfg.endpoint.empty()) {
      throw ConfigError("live mode needs --endpoint");
    }
    return cfg;
  }
};

// Picks the transcript file for one session. A directory is searched for
// <topic>_<agent>.jsonl, then <topic>.jsonl.
std::string resolve_transcript(const std::string& path, const std::string& topic,
                               const std::string& agent) {
  if (!fs::exists(path)) throw ConfigError("transcript not found: " + path);
  if (!fs::is_directory(path)) return path;
  const fs::path dir(path);
  const fs::path tagged = dir / (topic + "_" + agent + ".jsonl");
  if (fs::exists(tagged)) return tagged.string();
  const fs::path plain = dir / (topic + ".jsonl");
  if (fs::exists(plain)) return plain.string();
  throw ConfigError("no transcript for topic '" + topic + "' in " + path +
                    " (looked for " + tagged.filename().string() + " and " +
                    plain.filename().string() + ")");
}

struct RunArgs {
  std::string bench_path;
  std::string agent = "coggpt";
  std::vector<std::string> topics;
  std::string profile_name;
  std::size_t recall_k = 3;
  bool no_strict = false;
  std::string output_dir = "runs";
  unsigned jobs = 1;
  std::string templates_dir = "templates";
  std::string baseline_templates_dir;
  std::string feedback_dir;
  std::string config_path;
  ProviderFlags provider;
};

// Fills flag defaults from a flat JSON config file; explicit flags win.
void apply_config_file(const CLI::App& cmd, RunArgs& args) {
  if (args.config_path.empty()) return;
  json cfg = json::parse(read_file(args.config_path), nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) {
    throw ConfigError(args.config_path + ": expected a flat JSON object");
  }
  auto given = [&](const std::string& flag) {
    auto* opt = cmd.get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  auto take_string = [&](const char* key, const std::string& flag, std::string& out) {
    if (!cfg.contains(key) || given(flag)) return;
    if (!cfg[key].is_string()) throw ConfigError(args.config_path + ": /" + key +
                                                 ": expected string");
    out = cfg[key].get<std::string>();
  };
  take_string("bench", "--bench", args.bench_path);
  take_string("agent", "--agent", args.agent);
  take_string("profile", "--profile", args.profile_name);
  take_string("out", "--out", args.output_dir);
  take_string("templates", "--templates", args.templates_dir);
  take_string("baseline_templates", "--baseline-templates",
              args.baseline_templates_dir);
  take_string("feedback", "--feedback", args.feedback_dir);
  take_string("provider", "--provider", args.provider.provider);
  take_string("transcript", "--transcript", args.provider.transcript);
  take_string("endpoint", "--endpoint", args.provider.endpoint);
  take_string("model", "--model", args.provider.model);
  take_string("embedding_model", "--embedding-model", args.provider.embedding_model);
  take_string("api_key_env", "--api-key-env", args.provider.api_key_env);
  if (cfg.contains("topics") && !given("--topics")) {
    if (!cfg["topics"].is_array()) {
      throw ConfigError(args.config_path + ": /topics: expected array of strings");
    }
    args.topics.clear();
    for (const auto& t : cfg["topics"]) {
      if (!t.is_string()) {
        throw ConfigError(args.config_path + ": /topics: expected array of strings");
      }
      args.topics.push_back(t.get<std::string>());
    }
  }
  auto take_unsigned = [&](const char* key, const std::string& flag, auto& out) {
    if (!cfg.contains(key) || given(flag)) return;
    if (!cfg[key].is_number_unsigned() && !cfg[key].is_number_integer()) {
      throw ConfigError(args.config_path + ": /" + std::string(key) +
                        ": expected integer");
    }
    out = cfg[key].get<std::decay_t<decltype(out)>>();
  };
  take_unsigned("recall_k", "--recall-k", args.recall_k);
  take_unsigned("jobs", "--jobs", args.jobs);
  take_unsigned("seed", "--seed", args.provider.seed);
  take_unsigned("embedding_dim", "--embedding-dim", args.provider.embedding_dim);
  if (cfg.contains("strict") && !given("--no-strict")) {
    if (!cfg["strict"].is_boolean()) {
      throw ConfigError(args.config_path + ": /strict: expected boolean");
    }
    args.no_strict = !cfg["strict"].get<bool>();
  }
}

int cmd_run(const CLI::App& cmd, RunArgs args) {
  apply_config_file(cmd, args);
  if (args.bench_path.empty()) throw ConfigError("run needs --bench");

  const BenchmarkSet bench = load_benchmark(args.bench_path);
  const AgentKind kind = parse_agent_kind(args.agent);
  const TemplateSet templates = TemplateSet::load(args.templates_dir);

  std::optional<BaselineTemplates> baselines;
  if (kind != AgentKind::coggpt) {
    const std::string dir = args.baseline_templates_dir.empty()
                                ? (fs::path(args.templates_dir) / "baselines").string()
                                : args.baseline_templates_dir;
    baselines = BaselineTemplates::load(dir);
  }

  std::vector<std::string> topics = args.topics;
  if (topics.empty()) {
    for (const auto& q : bench.questionnaires) topics.push_back(q.topic_id);
  }
  for (const auto& topic : topics) {
    if (!bench.find_questionnaire(topic)) {
      throw ConfigError("topic '" + topic + "' is not in the benchmark");
    }
  }

  std::string profile_name = args.profile_name;
  if (profile_name.empty()) {
    if (bench.profiles.size() != 1) {
      throw ConfigError("--profile is required when the benchmark has " +
                        std::to_string(bench.profiles.size()) + " profiles");
    }
    profile_name = bench.profiles[0].name;
  }
  if (!bench.find_profile(profile_name)) {
    throw ConfigError("no profile named '" + profile_name + "'");
  }

  // Resolve per-topic inputs up front so config errors beat any session work.
  struct Job {
    std::string topic;
    ProviderConfig provider;
    std::optional<FeedbackLog> feedback;
  };
  std::vector<Job> jobs_list;
  const std::string feedback_dir = args.feedback_dir.empty()
                                       ? (fs::path(args.bench_path) / "feedback").string()
                                       : args.feedback_dir;
  for (const auto& topic : topics) {
    Job job;
    job.topic = topic;
    std::string transcript;
    // an absent --transcript is to_config's error, not a lookup failure
    if (args.provider.provider == "replay" && !args.provider.transcript.empty()) {
      transcript = resolve_transcript(args.provider.transcript, topic, args.agent);
    }
    job.provider = args.provider.to_config(transcript);
    if (kind == AgentKind::react || kind == AgentKind::reflexion) {
      const fs::path fb = fs::path(feedback_dir) / (topic + ".json");
      if (fs::exists(fb)) job.feedback = load_feedback(fb.string());
    }
    jobs_list.push_back(std::move(job));
  }

  struct Outcome {
    SessionLog log;
    AgentState state;
    std::exception_ptr error;
  };
  std::vector<Outcome> outcomes(jobs_list.size());

  const unsigned worker_count =
      std::max(1u, std::min<unsigned>(args.jobs, jobs_list.size()));
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= jobs_list.size()) return;
        index = next++;
      }
      Outcome& outcome = outcomes[index];
      try {
        const Job& job = jobs_list[index];
        std::unique_ptr<Provider> provider = make_provider(job.provider);
        SessionSpec spec;
        spec.topic_id = job.topic;
        spec.profile_name = profile_name;
        spec.kind = kind;
        spec.recall_k = args.recall_k;
        spec.strict = !args.no_strict;
        outcome.log = run_session(bench, spec, *provider, templates,
                                  baselines ? &*baselines : nullptr,
                                  job.feedback ? &*job.feedback : nullptr,
                                  &outcome.state);
      } catch (...) {
        outcome.error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> workers;
  for (unsigned i = 0; i < worker_count; ++i) workers.emplace_back(worker);
  for (auto& w : workers) w.join();

  for (const auto& outcome : outcomes) {
    if (outcome.error) std::rethrow_exception(outcome.error);
  }

  bool all_complete = true;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const SessionLog& log = outcomes[i].log;
    const fs::path dir = fs::path(args.output_dir) /
                         (log.agent + "_" + log.variant + "_" + log.topic_id + "_" +
                          log.profile_name);
    fs::create_directories(dir);
    write_session_log(log, (dir / "session.json").string());
    if (kind == AgentKind::coggpt) {
      save_ltm(outcomes[i].state.ltm, (dir / "ltm.jsonl").string());
    }
    if (log.complete) {
      std::cout << "session " << log.agent << "/" << log.topic_id << ": "
                << log.records.size() << " passes -> " << dir.string() << "\n";
    } else {
      all_complete = false;
      std::cerr << "session " << log.agent << "/" << log.topic_id
                << " aborted: " << log.error << " (partial log in " << dir.string()
                << ")\n";
    }
  }
  return all_complete ? 0 : 1;
}

struct EvalArgs {
  std::string sessions_dir;
  std::string humans_path;
  std::string rationality_path;
  std::string output_dir = "reports";
  bool literal_agreement = false;
};

int cmd_eval(const EvalArgs& args) {
  if (!fs::exists(args.sessions_dir)) {
    throw ConfigError("sessions dir not found: " + args.sessions_dir);
  }
  std::vector<std::string> session_files;
  for (const auto& e : fs::recursive_directory_iterator(args.sessions_dir)) {
    if (e.is_regular_file() && e.path().filename() == "session.json") {
      session_files.push_back(e.path().string());
    }
  }
  std::sort(session_files.begin(), session_files.end());
  if (session_files.empty()) {
    std::cerr << "no session.json files under " << args.sessions_dir << "\n";
    return 1;
  }

  const auto humans = load_rating_records(args.humans_path);
  const auto rationality = load_rating_records(args.rationality_path);

  std::map<std::pair<std::string, std::string>, std::vector<ModelAnswer>> groups;
  for (const auto& file : session_files) {
    SessionAnswers session = read_session_answers(file);
    if (!session.complete) {
      std::cerr << "warning: " << file << " is incomplete; scoring finished passes\n";
    }
    auto& group = groups[{session.agent, session.variant}];
    group.insert(group.end(), session.answers.begin(), session.answers.end());
  }

  ReportOptions options;
  options.per_question_agreement = args.literal_agreement;

  fs::create_directories(args.output_dir);
  bool any_scored = false;
  for (const auto& [key, answers] : groups) {
    const auto& [agent, variant] = key;
    ReportData report =
        build_report(agent, variant, answers, humans, rationality, options);
    for (const auto& w : report.warnings) {
      std::cerr << "warning: " << agent << "/" << variant << ": " << w << "\n";
    }
    const std::string stem = "report_" + agent + "_" + variant;
    const fs::path base = fs::path(args.output_dir);
    write_report_json(report, (base / (stem + ".json")).string());
    write_report_csv(report, (base / (stem + ".csv")).string());
    std::cout << stem << ": authenticity avg "
              << (report.authenticity.avg ? std::to_string(*report.authenticity.avg)
                                          : std::string("n/a"))
              << ", rationality avg "
              << (report.rationality.avg ? std::to_string(*report.rationality.avg)
                                         : std::string("n/a"))
              << "\n";
    // Rationality pools panel votes across topics, so it alone does not prove
    // the panels describe this run; require contact with the model's answers.
    bool touched = !report.authenticity.per_iteration.empty();
    if (!touched) {
      std::set<std::pair<std::string, int>> answered;
      for (const auto& a : answers) answered.insert({a.topic_id, a.iteration});
      for (const auto& r : rationality) {
        if (answered.count({r.topic_id, r.iteration})) {
          touched = true;
          break;
        }
      }
    }
    if (touched) any_scored = true;
  }
  if (!any_scored) {
    std::cerr << "model answers and human ratings do not intersect\n";
    return 1;
  }
  return 0;
}

void write_opinions_json(const std::string& topic, const OpinionSet& set,
                         const std::string& path) {
  ordered_json j;
  j["topic"] = topic;
  j["entries"] = ordered_json::array();
  for (const auto& e : set.entries) {
    ordered_json entry;
    entry["number"] = e.number;
    entry["perspective"] = e.perspective;
    entry["opinion"] = e.opinion;
    entry["supporters"] = e.supporters;
    entry["reasons"] = e.reasons;
    j["entries"].push_back(std::move(entry));
  }
  j["warnings"] = set.warnings;
  write_file_atomic(path, j.dump(2) + "\n");
}

int cmd_gen_opinions(const ProviderFlags& flags, const std::string& templates_dir,
                     const std::string& topic, const std::string& out,
                     const std::string& sheet) {
  const TemplateSet templates = TemplateSet::load(templates_dir);
  std::unique_ptr<Provider> provider = make_provider(flags.to_config(flags.transcript));
  OpinionSet set = generate_opinion_set(topic, *provider, templates);
  for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
  write_opinions_json(topic, set, out);
  std::cout << "wrote " << set.entries.size() << " opinions to " << out << "\n";
  if (!sheet.empty()) {
    export_review_sheet(topic, set, sheet);
    std::cout << "wrote review sheet to " << sheet << "\n";
  }
  return 0;
}

int cmd_gen_profile(const ProviderFlags& flags, const std::string& templates_dir,
                    const std::string& character, const std::string& out) {
  const TemplateSet templates = TemplateSet::load(templates_dir);
  std::unique_ptr<Provider> provider = make_provider(flags.to_config(flags.transcript));
  std::vector<std::string> warnings;
  ProfileDoc doc = generate_profile(character, *provider, templates, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (out.size() > 4 && out.substr(out.size() - 4) == ".txt") {
    write_file_atomic(out, doc.to_text());
  } else {
    ordered_json j;
    j["character"] = character;
    ordered_json attrs = ordered_json::object();
    for (const auto& [k, v] : doc.attributes) attrs[k] = v;
    j["attributes"] = std::move(attrs);
    ordered_json extras = ordered_json::object();
    for (const auto& [k, v] : doc.extras) extras[k] = v;
    j["extras"] = std::move(extras);
    j["warnings"] = warnings;
    write_file_atomic(out, j.dump(2) + "\n");
  }
  std::cout << "wrote profile to " << out << "\n";
  return 0;
}

int cmd_gen_import(const std::string& sheet, const std::string& out) {
  Questionnaire q = import_review_sheet(sheet);
  ordered_json j;
  j["topic_id"] = q.topic_id;
  j["questions"] = ordered_json::array();
  for (const auto& question : q.questions) {
    ordered_json qj;
    qj["id"] = question.id;
    qj["statement"] = question.statement;
    j["questions"].push_back(std::move(qj));
  }
  write_file_atomic(out, j.dump(2) + "\n");
  std::cout << "accepted " << q.questions.size() << " questions -> " << out << "\n";
  return 0;
}

int cmd_validate(const std::string& bench_path) {
  const BenchmarkSet bench = load_benchmark(bench_path);
  const ValidationReport report = validate_benchmark(bench);
  if (report.ok()) {
    std::cout << "ok: " << bench.name << " (" << bench.questionnaires.size()
              << " topics, " << bench.profiles.size() << " profiles)\n";
    return 0;
  }
  for (const auto& v : report.violations) {
    std::cout << v.where << ": " << v.what << "\n";
  }
  std::cout << report.violations.size() << " violation(s)\n";
  return 1;
}

int cmd_stats(const std::string& bench_path) {
  const BenchmarkSet bench = load_benchmark(bench_path);
  const StatsTable table = corpus_stats(bench);
  std::printf("%-24s %8s %12s\n", "category", "items", "mean_words");
  for (const auto& [name, cat] : table.per_category) {
    std::printf("%-24s %8zu %12.2f\n", name.c_str(), cat.items, cat.mean_words);
  }
  std::printf("%-24s %8zu %12.2f\n", "overall", table.overall.items,
              table.overall.mean_words);
  return 0;
}

int cmd_replay_inspect(const std::string& path) {
  Transcript transcript = Transcript::load(path);
  std::cout << path << ": " << transcript.entries.size() << " entries\n";
  for (std::size_t i = 0; i < transcript.entries.size(); ++i) {
    const auto& e = transcript.entries[i];
    std::string expect = e.has_expect ? e.expect : "-";
    if (expect.size() > 48) expect = expect.substr(0, 45) + "...";
    std::printf("%4zu  expect=%-50s response=%zu bytes\n", i, expect.c_str(),
                e.response.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative cognitive agent benchmark harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run agent sessions");
  run->add_option("--bench", run_args.bench_path, "Benchmark root directory");
  run->add_option("--agent", run_args.agent, "coggpt, cot, react or reflexion");
  run->add_option("--topics", run_args.topics, "Topics to run (default: all)");
  run->add_option("--profile", run_args.profile_name, "Profile name");
  run->add_option("--recall-k", run_args.recall_k, "Statements recalled per question");
  run->add_flag("--no-strict", run_args.no_strict,
                "Allow partial batches and iteration counts other than 10");
  run->add_option("--out", run_args.output_dir, "Output directory for session logs");
  run->add_option("--jobs", run_args.jobs, "Parallel sessions");
  run->add_option("--templates", run_args.templates_dir, "Pinned template directory");
  run->add_option("--baseline-templates", run_args.baseline_templates_dir,
                  "Baseline scaffold directory (default: <templates>/baselines)");
  run->add_option("--feedback", run_args.feedback_dir,
                  "Feedback directory (default: <bench>/feedback)");
  run->add_option("--config", run_args.config_path,
                  "Flat JSON config file; explicit flags override it");
  run_args.provider.add_options(run);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score session logs against panels");
  eval->add_option("--sessions", eval_args.sessions_dir, "Directory of session logs")
      ->required();
  eval->add_option("--humans", eval_args.humans_path, "Authenticity panel JSON")
      ->required();
  eval->add_option("--rationality", eval_args.rationality_path,
                   "Rationality panel JSON")
      ->required();
  eval->add_option("--out", eval_args.output_dir, "Report output directory");
  eval->add_flag("--literal-agreement", eval_args.literal_agreement,
                 "Score authenticity as per-question exact agreement");

  CLI::App* gen = app.add_subcommand("gen", "Generate benchmark pieces");
  gen->require_subcommand(1);
  ProviderFlags gen_provider;
  std::string gen_templates = "templates";
  std::string gen_topic, gen_out, gen_sheet, gen_character;

  CLI::App* gen_opinions = gen->add_subcommand("opinions", "Generate an opinion set");
  gen_opinions->add_option("--topic", gen_topic, "Topic name")->required();
  gen_opinions->add_option("--out", gen_out, "Output JSON path")->required();
  gen_opinions->add_option("--sheet", gen_sheet, "Also export a review sheet here");
  gen_opinions->add_option("--templates", gen_templates, "Pinned template directory");
  gen_provider.add_options(gen_opinions);

  CLI::App* gen_profile = gen->add_subcommand("profile", "Generate a persona profile");
  gen_profile->add_option("--character", gen_character, "Character sketch")->required();
  gen_profile->add_option("--out", gen_out, "Output path (.txt for plain text)")
      ->required();
  gen_profile->add_option("--templates", gen_templates, "Pinned template directory");
  gen_provider.add_options(gen_profile);

  CLI::App* gen_import = gen->add_subcommand("import", "Import a completed review sheet");
  gen_import->add_option("--sheet", gen_sheet, "Completed review sheet")->required();
  gen_import->add_option("--out", gen_out, "Questionnaire output path")->required();

  std::string validate_bench;
  CLI::App* validate = app.add_subcommand("validate", "Check benchmark invariants");
  validate->add_option("--bench", validate_bench, "Benchmark root directory")
      ->required();

  std::string stats_bench;
  CLI::App* stats = app.add_subcommand("stats", "Corpus word-count table");
  stats->add_option("--bench", stats_bench, "Benchmark root directory")->required();

  std::string inspect_path;
  CLI::App* inspect = app.add_subcommand("replay-inspect", "Describe a transcript");
  inspect->add_option("--transcript", inspect_path, "Transcript JSONL file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(*run, run_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (gen->parsed()) {
      if (gen_opinions->parsed()) {
        return cmd_gen_opinions(gen_provider, gen_templates, gen_topic, gen_out,
                                gen_sheet);
      }
      if (gen_profile->parsed()) {
        return cmd_gen_profile(gen_provider, gen_templates, gen_character, gen_out);
      }
      if (gen_import->parsed()) return cmd_gen_import(gen_sheet, gen_out);
    }
    if (validate->parsed()) return cmd_validate(validate_bench);
    if (stats->parsed()) return cmd_stats(stats_bench);
    if (inspect->parsed()) return cmd_replay_inspect(inspect_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
