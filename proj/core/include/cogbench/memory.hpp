#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cogbench/prompts.hpp"
#include "cogbench/provider.hpp"

namespace cogbench {

struct StmEntry {
  std::string source_id;
  std::string text;
  int iteration = 0;
};

// One iteration's perceptual buffer; full once the batch is ingested, cleared
// before the next batch arrives.
struct Stm {
  std::vector<StmEntry> entries;
  bool empty() const { return entries.empty(); }
};

struct StmItem {
  std::string id;
  std::string text;
};

// Stores one entry per item, in order. Throws if the STM was not cleared
// after the previous iteration.
void stm_ingest(Stm& stm, const std::vector<StmItem>& items, int iteration);

void clear_stm(Stm& stm);

struct KnowledgeItem {
  std::string statement;
  int score = 0;  // 1..5
  EmbeddingVector embedding;
  int iteration = 0;
  std::vector<std::string> source_ids;
};

struct LtmStore {
  std::vector<KnowledgeItem> items;  // append order, never reordered
  std::size_t dim = 0;               // fixed by the first append
};

struct CommitOutcome {
  std::vector<KnowledgeDraft> retained;  // draft order preserved
  std::vector<KnowledgeDraft> dropped;   // the floor(0.4 n) lowest-scored
};

// Forgets floor(0.4 n) of the drafts: the ones that sort first by
// (score ascending, draft order ascending). Every retained score is >= every
// dropped score.
CommitOutcome commit_knowledge(const std::vector<KnowledgeDraft>& drafts);

using EmbedFn = std::function<EmbeddingVector(const std::string&)>;

// Embeds each retained statement and appends the items. All-or-nothing: an
// embedding failure leaves the store untouched. Returns the count appended.
std::size_t ltm_store(LtmStore& ltm, const std::vector<KnowledgeDraft>& retained,
                      const EmbedFn& embed, int iteration,
                      const std::vector<std::string>& source_ids);

struct RecallHit {
  std::size_t item_index = 0;  // position in LtmStore::items
  double similarity = 0.0;
};

struct RecallResult {
  std::vector<RecallHit> hits;  // similarity nonincreasing, ties by append order
};

// Cosine top-min(k, size) over the full store. Empty store yields no hits.
RecallResult recall(const LtmStore& ltm, const std::string& query_text, std::size_t k,
                    const EmbedFn& embed);

// Append-only JSON Lines snapshot (statement, score, iteration, source_ids,
// embedding), one item per line.
void save_ltm(const LtmStore& ltm, const std::string& path);
LtmStore load_ltm(const std::string& path);

}  // namespace cogbench
