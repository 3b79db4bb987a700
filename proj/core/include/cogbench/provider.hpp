#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace cogbench {

struct PromptRequest {
  std::string template_id;
  std::string text;
  double temperature = 0.0;
  std::string tag;
};

enum class ProviderMode { live, replay };

struct CompletionResult {
  std::string text;  // recorded verbatim, no trimming
  ProviderMode provider = ProviderMode::replay;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

// Deterministic stand-in for an embedding endpoint. Each component i hashes
// (seed, i, text bytes) with 64-bit FNV-1a, maps the hash to [-1, 1], and the
// vector is L2-normalized. A pure function of (text, dim, seed).
EmbeddingVector pseudo_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct TranscriptEntry {
  bool has_expect = false;
  std::string expect;  // must occur in the request text when present
  std::string response;
};

// Ordered canned completions, consumed strictly front to back by exactly one
// session.
struct Transcript {
  std::vector<TranscriptEntry> entries;
  std::size_t cursor = 0;

  // JSON Lines: {"expect": "...", "response": "..."} per line, expect optional.
  static Transcript load(const std::string& path);
  std::size_t remaining() const { return entries.size() - cursor; }
};

// Returns the entry at the cursor and advances it. Throws std::runtime_error
// when the transcript is exhausted or an expect-substring does not occur in
// req.text.
CompletionResult replay_next(Transcript& transcript, const PromptRequest& req);

struct ProviderConfig {
  ProviderMode mode = ProviderMode::replay;
  std::string endpoint;         // base URL; /chat/completions and /embeddings are appended
  std::string model;
  std::string embedding_model;
  std::size_t embedding_dim = 1536;
  std::string api_key_env;      // name of the env var holding the credential
  int max_retries = 3;          // transport retries per request
  int backoff_base_ms = 1000;   // doubled per retry
  int max_inflight = 0;         // 0 = unlimited concurrent live calls
  std::uint64_t seed = 0;       // replay pseudo-embedding seed
  std::string transcript_path;  // replay mode
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual CompletionResult complete(const PromptRequest& req) = 0;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual const ProviderConfig& config() const = 0;
};

// Serves completions from a transcript and embeddings from pseudo_embed;
// bitwise deterministic for a fixed transcript and request sequence.
class ReplayProvider : public Provider {
 public:
  ReplayProvider(ProviderConfig cfg, Transcript transcript);

  CompletionResult complete(const PromptRequest& req) override;
  EmbeddingVector embed(const std::string& text) override;
  const ProviderConfig& config() const override { return cfg_; }

  const Transcript& transcript() const { return transcript_; }

 private:
  ProviderConfig cfg_;
  Transcript transcript_;
};

// Client for a chat/embedding HTTP endpoint speaking the common JSON wire
// shape: {model, messages, temperature} -> choices[0].message.content and
// {model, input} -> data[0].embedding.
class LiveProvider : public Provider {
 public:
  explicit LiveProvider(ProviderConfig cfg);

  CompletionResult complete(const PromptRequest& req) override;
  EmbeddingVector embed(const std::string& text) override;
  const ProviderConfig& config() const override { return cfg_; }

 private:
  std::string post_json(const std::string& path, const std::string& body);

  ProviderConfig cfg_;
  std::string api_key_;
  struct Gate;
  std::shared_ptr<Gate> gate_;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& cfg);

}  // namespace cogbench
