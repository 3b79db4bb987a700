#include "cogbench/provider.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cogbench/util.hpp"

namespace cogbench {

EmbeddingVector pseudo_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("pseudo_embed: dim must be >= 1");
  EmbeddingVector v;
  v.values.resize(dim);
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint64_t h = kFnvOffsetBasis;
    h = fnv1a64_mix(seed, h);
    h = fnv1a64_mix(static_cast<std::uint64_t>(i), h);
    h = fnv1a64(text, h);
    const double u = static_cast<double>(h) * 0x1p-64;  // [0, 1)
    const double x = 2.0 * u - 1.0;
    v.values[i] = x;
    norm_sq += x * x;
  }
  if (norm_sq == 0.0) {
    v.values[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v.values) x *= inv;
  return v;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

Transcript Transcript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript: " + path);
  Transcript t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("response") ||
        !j["response"].is_string()) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": transcript entry must be an object with a string \"response\"");
    }
    TranscriptEntry e;
    e.response = j["response"].get<std::string>();
    if (j.contains("expect")) {
      if (!j["expect"].is_string()) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": \"expect\" must be a string");
      }
      e.has_expect = true;
      e.expect = j["expect"].get<std::string>();
    }
    t.entries.push_back(std::move(e));
  }
  return t;
}

CompletionResult replay_next(Transcript& transcript, const PromptRequest& req) {
  if (transcript.cursor >= transcript.entries.size()) {
    throw std::runtime_error("transcript exhausted after " +
                             std::to_string(transcript.entries.size()) + " entries (request \"" +
                             req.template_id + "\")");
  }
  const TranscriptEntry& e = transcript.entries[transcript.cursor];
  if (e.has_expect && req.text.find(e.expect) == std::string::npos) {
    throw std::runtime_error("transcript entry " + std::to_string(transcript.cursor) +
                             ": expected substring \"" + e.expect +
                             "\" not found in request text (request \"" + req.template_id + "\")");
  }
  ++transcript.cursor;
  return CompletionResult{e.response, ProviderMode::replay};
}

namespace {

void check_request(const PromptRequest& req) {
  if (req.text.empty()) throw std::invalid_argument("prompt text must be non-empty");
  if (req.temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
}

}  // namespace

ReplayProvider::ReplayProvider(ProviderConfig cfg, Transcript transcript)
    : cfg_(std::move(cfg)), transcript_(std::move(transcript)) {
  cfg_.mode = ProviderMode::replay;
}

CompletionResult ReplayProvider::complete(const PromptRequest& req) {
  check_request(req);
  return replay_next(transcript_, req);
}

EmbeddingVector ReplayProvider::embed(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("embed: text must be non-empty");
  return pseudo_embed(text, cfg_.embedding_dim, cfg_.seed);
}

// Bounds concurrent live calls when max_inflight > 0.
struct LiveProvider::Gate {
  std::mutex mu;
  std::condition_variable cv;
  int inflight = 0;
  int limit = 0;

  void enter() {
    if (limit <= 0) return;
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return inflight < limit; });
    ++inflight;
  }
  void leave() {
    if (limit <= 0) return;
    {
      std::lock_guard lock(mu);
      --inflight;
    }
    cv.notify_one();
  }
};

LiveProvider::LiveProvider(ProviderConfig cfg) : cfg_(std::move(cfg)), gate_(new Gate) {
  cfg_.mode = ProviderMode::live;
  if (cfg_.endpoint.empty()) throw ConfigError("live provider requires an endpoint URL");
  gate_->limit = cfg_.max_inflight;
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key) {
      throw ConfigError("credential env var " + cfg_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

std::string LiveProvider::post_json(const std::string& path, const std::string& body) {
  // split endpoint into scheme://host[:port] and a base path
  std::string base = cfg_.endpoint;
  std::string prefix;
  const std::size_t scheme = base.find("://");
  if (scheme != std::string::npos) {
    const std::size_t slash = base.find('/', scheme + 3);
    if (slash != std::string::npos) {
      prefix = base.substr(slash);
      base = base.substr(0, slash);
    }
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  gate_->enter();
  struct Release {
    Gate* g;
    ~Release() { g->leave(); }
  } release{gate_.get()};

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::milliseconds(
          static_cast<long long>(cfg_.backoff_base_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(base);
    client.set_read_timeout(120, 0);
    client.set_connection_timeout(10, 0);
    httplib::Result res = client.Post(prefix + path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;  // transient; retry
    }
    if (res->status < 200 || res->status >= 300) {
      throw std::runtime_error("HTTP " + std::to_string(res->status) + " from " + path +
                               ": " + res->body.substr(0, 200));
    }
    return res->body;
  }
  throw std::runtime_error(last_error + " after " + std::to_string(cfg_.max_retries + 1) +
                           " attempts to " + path);
}

CompletionResult LiveProvider::complete(const PromptRequest& req) {
  check_request(req);
  nlohmann::json body = {
      {"model", cfg_.model},
      {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", req.text}}})},
      {"temperature", req.temperature},
  };
  const std::string raw = post_json("/chat/completions", body.dump());
  nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty() || !j["choices"][0].contains("message") ||
      !j["choices"][0]["message"].contains("content") ||
      !j["choices"][0]["message"]["content"].is_string()) {
    throw std::runtime_error("malformed completion body: " + raw.substr(0, 200));
  }
  return CompletionResult{j["choices"][0]["message"]["content"].get<std::string>(),
                          ProviderMode::live};
}

EmbeddingVector LiveProvider::embed(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("embed: text must be non-empty");
  nlohmann::json body = {{"model", cfg_.embedding_model}, {"input", text}};
  const std::string raw = post_json("/embeddings", body.dump());
  nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() || j["data"].empty() ||
      !j["data"][0].contains("embedding") || !j["data"][0]["embedding"].is_array()) {
    throw std::runtime_error("malformed embedding body: " + raw.substr(0, 200));
  }
  EmbeddingVector v;
  for (const auto& x : j["data"][0]["embedding"]) {
    if (!x.is_number()) throw std::runtime_error("embedding contains a non-numeric value");
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw std::runtime_error("embedding contains a non-finite value");
    v.values.push_back(d);
  }
  if (v.dim() != cfg_.embedding_dim) {
    throw std::runtime_error("embedding dimension mismatch: got " + std::to_string(v.dim()) +
                             ", configured " + std::to_string(cfg_.embedding_dim));
  }
  return v;
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg) {
  if (cfg.mode == ProviderMode::replay) {
    if (cfg.transcript_path.empty()) {
      throw ConfigError("replay mode requires a transcript path");
    }
    return std::make_unique<ReplayProvider>(cfg, Transcript::load(cfg.transcript_path));
  }
  return std::make_unique<LiveProvider>(cfg);
}

}  // namespace cogbench
