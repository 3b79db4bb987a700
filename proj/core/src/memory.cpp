#include "cogbench/memory.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cogbench/util.hpp"

namespace cogbench {

void stm_ingest(Stm& stm, const std::vector<StmItem>& items, int iteration) {
  if (!stm.empty()) {
    throw std::logic_error("stm_ingest into a non-empty STM: clear_stm was skipped");
  }
  for (const StmItem& item : items) {
    if (item.text.empty()) throw std::invalid_argument("stm_ingest: empty text for item " + item.id);
    stm.entries.push_back(StmEntry{item.id, item.text, iteration});
  }
}

void clear_stm(Stm& stm) { stm.entries.clear(); }

CommitOutcome commit_knowledge(const std::vector<KnowledgeDraft>& drafts) {
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    if (drafts[i].score < 1 || drafts[i].score > 5) {
      throw std::invalid_argument("commit_knowledge: draft " + std::to_string(i) +
                                  " has score outside 1..5");
    }
  }
  const std::size_t n = drafts.size();
  const std::size_t drop = n * 2 / 5;  // floor(0.4 n), exact in integers

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // stable on draft order, so equal scores drop the earlier draft first
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return drafts[a].score < drafts[b].score; });

  std::vector<bool> dropped_mask(n, false);
  CommitOutcome out;
  for (std::size_t i = 0; i < drop; ++i) {
    dropped_mask[order[i]] = true;
    out.dropped.push_back(drafts[order[i]]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!dropped_mask[i]) out.retained.push_back(drafts[i]);
  }
  return out;
}

std::size_t ltm_store(LtmStore& ltm, const std::vector<KnowledgeDraft>& retained,
                      const EmbedFn& embed, int iteration,
                      const std::vector<std::string>& source_ids) {
  // stage everything before touching the store
  std::vector<KnowledgeItem> staged;
  staged.reserve(retained.size());
  for (const KnowledgeDraft& draft : retained) {
    EmbeddingVector v = embed(draft.knowledge);
    if (ltm.dim != 0 && v.dim() != ltm.dim) {
      throw std::runtime_error("ltm_store: embedding dim " + std::to_string(v.dim()) +
                               " does not match store dim " + std::to_string(ltm.dim));
    }
    staged.push_back(KnowledgeItem{draft.knowledge, draft.score, std::move(v), iteration, source_ids});
  }
  if (!staged.empty() && ltm.dim == 0) ltm.dim = staged.front().embedding.dim();
  for (KnowledgeItem& item : staged) ltm.items.push_back(std::move(item));
  return retained.size();
}

RecallResult recall(const LtmStore& ltm, const std::string& query_text, std::size_t k,
                    const EmbedFn& embed) {
  if (k < 1) throw std::invalid_argument("recall: k must be >= 1");
  RecallResult result;
  if (ltm.items.empty()) return result;

  const EmbeddingVector query = embed(query_text);
  result.hits.reserve(ltm.items.size());
  for (std::size_t i = 0; i < ltm.items.size(); ++i) {
    result.hits.push_back(RecallHit{i, cosine_similarity(query, ltm.items[i].embedding)});
  }
  // stable on append order, so equal similarities keep the earlier item first
  std::stable_sort(result.hits.begin(), result.hits.end(),
                   [](const RecallHit& a, const RecallHit& b) { return a.similarity > b.similarity; });
  if (result.hits.size() > k) result.hits.resize(k);
  return result;
}

void save_ltm(const LtmStore& ltm, const std::string& path) {
  std::ostringstream out;
  for (const KnowledgeItem& item : ltm.items) {
    nlohmann::ordered_json j;
    j["statement"] = item.statement;
    j["score"] = item.score;
    j["iteration"] = item.iteration;
    j["source_ids"] = item.source_ids;
    j["embedding"] = item.embedding.values;
    out << j.dump() << "\n";
  }
  write_file_atomic(path, out.str());
}

LtmStore load_ltm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open LTM snapshot: " + path);
  LtmStore ltm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed LTM line");
    }
    KnowledgeItem item;
    item.statement = j.value("statement", "");
    item.score = j.value("score", 0);
    item.iteration = j.value("iteration", 0);
    if (j.contains("source_ids")) {
      for (const auto& s : j["source_ids"]) item.source_ids.push_back(s.get<std::string>());
    }
    for (const auto& x : j["embedding"]) item.embedding.values.push_back(x.get<double>());
    if (ltm.dim == 0) ltm.dim = item.embedding.dim();
    if (item.embedding.dim() != ltm.dim) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": inconsistent embedding dim");
    }
    ltm.items.push_back(std::move(item));
  }
  return ltm;
}

}  // namespace cogbench
