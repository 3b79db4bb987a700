// Microbenchmarks for the hot paths: embedding, recall, forgetting, the
// agreement metrics, and reply parsing. Run with --benchmark_filter=... to
// narrow.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "cogbench/memory.hpp"
#include "cogbench/metrics.hpp"
#include "cogbench/prompts.hpp"
#include "cogbench/provider.hpp"

using namespace cogbench;

namespace {

constexpr std::uint64_t kSeed = 7;

std::vector<int> random_ratings(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<int> out(n);
  for (int& v : out) v = 1 + static_cast<int>(gen() % 5);
  return out;
}

LtmStore make_store(std::size_t n, std::size_t dim) {
  LtmStore ltm;
  ltm.dim = dim;
  ltm.items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    KnowledgeItem item;
    item.statement = "fact " + std::to_string(i) + " about tackle and tides";
    item.score = 1 + static_cast<int>(i % 5);
    item.embedding = pseudo_embed(item.statement, dim, kSeed);
    item.iteration = static_cast<int>(i / 3);
    ltm.items.push_back(std::move(item));
  }
  return ltm;
}

}  // namespace

static void BM_PseudoEmbed(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const std::string text = "braided line resists abrasion on rocky bottom structure";
  for (auto _ : state) {
    benchmark::DoNotOptimize(pseudo_embed(text, dim, kSeed));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_PseudoEmbed)->Arg(64)->Arg(256)->Arg(1536);

static void BM_Recall(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 256;
  const LtmStore ltm = make_store(n, dim);
  const auto embed = [&](const std::string& t) { return pseudo_embed(t, dim, kSeed); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(recall(ltm, "gear upkeep in salt water", 3, embed));
  }
}
BENCHMARK(BM_Recall)->Arg(27)->Arg(270)->Arg(2700);

static void BM_CommitKnowledge(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<KnowledgeDraft> drafts(n);
  std::mt19937_64 gen(kSeed);
  for (std::size_t i = 0; i < n; ++i) {
    drafts[i].knowledge = "draft " + std::to_string(i);
    drafts[i].score = 1 + static_cast<int>(gen() % 5);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(commit_knowledge(drafts));
  }
}
BENCHMARK(BM_CommitKnowledge)->Arg(10)->Arg(100)->Arg(1000);

static void BM_CohenKappa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<int> a = random_ratings(n, 1);
  const std::vector<int> b = random_ratings(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cohen_kappa(a, b));
  }
}
BENCHMARK(BM_CohenKappa)->Arg(10)->Arg(1000);

static void BM_FleissKappaRatings(benchmark::State& state) {
  const auto items = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<int>> per_item(items);
  for (std::size_t i = 0; i < items; ++i) per_item[i] = random_ratings(7, i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fleiss_kappa_ratings(per_item, 5));
  }
}
BENCHMARK(BM_FleissKappaRatings)->Arg(10)->Arg(1000);

static void BM_SpearmanRho(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(kSeed);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(gen() % 100);
    y[i] = static_cast<double>(gen() % 100);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(spearman_rho(x, y));
  }
}
BENCHMARK(BM_SpearmanRho)->Arg(10)->Arg(1000);

static void BM_ParseKnowledgeList(benchmark::State& state) {
  std::string reply = "Here is the distilled list you asked for:\n```json\n[";
  for (int i = 0; i < 10; ++i) {
    if (i) reply += ",";
    reply += R"({"thoughts": "the batch keeps citing gear wear", )";
    reply += R"("knowledge": "statement )" + std::to_string(i) + R"(", "score": )" +
             std::to_string(1 + i % 5) + "}";
  }
  reply += "]\n```\nLet me know if you need more.\n";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_knowledge_list(reply));
  }
}
BENCHMARK(BM_ParseKnowledgeList);

BENCHMARK_MAIN();
