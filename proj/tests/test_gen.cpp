#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <string>
#include <vector>

#include "cogbench/gen.hpp"
#include "cogbench/profile.hpp"
#include "cogbench/prompts.hpp"
#include "cogbench/provider.hpp"
#include "cogbench/util.hpp"
#include "support.hpp"

using namespace cogbench;
using nlohmann::json;

namespace {

ReplayProvider one_shot(const std::string& expect, const std::string& response) {
  ProviderConfig cfg;
  cfg.mode = ProviderMode::replay;
  cfg.embedding_dim = 8;
  return ReplayProvider(cfg, testsupport::make_transcript({{expect, response}}));
}

std::string opinion_blocks(int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) {
    s += "Number: " + std::to_string(i) + "\n";
    s += "Perspective: Angle " + std::to_string(i) + "\n";
    s += "Opinion: Claim " + std::to_string(i) + " holds up.\n";
    s += "Supporters: Group A, Group B\n";
    s += "Reasons: Field reports back claim " + std::to_string(i) + ".\n\n";
  }
  return s;
}

OpinionSet set_with_supporters(const std::vector<std::vector<std::string>>& groups) {
  OpinionSet set;
  int n = 1;
  for (const auto& supporters : groups) {
    OpinionEntry e;
    e.number = n++;
    e.perspective = "p";
    e.opinion = "o";
    e.supporters = supporters;
    e.reasons = "r";
    set.entries.push_back(std::move(e));
  }
  return set;
}

}  // namespace

TEST_CASE("opinion generation parses ten blocks") {
  const TemplateSet templates = TemplateSet::load(testsupport::templates_dir());
  ReplayProvider provider = one_shot("drone deliveries", opinion_blocks(10));

  OpinionSet set = generate_opinion_set("drone deliveries", provider, templates);
  REQUIRE(set.entries.size() == 10);
  CHECK(set.warnings.empty());
  CHECK(set.entries[0].number == 1);
  CHECK(set.entries[0].perspective == "Angle 1");
  CHECK(set.entries[0].opinion == "Claim 1 holds up.");
  CHECK(set.entries[0].supporters == std::vector<std::string>{"Group A", "Group B"});
  CHECK(set.entries[9].reasons == "Field reports back claim 10.");
}

TEST_CASE("an off-count opinion reply is a warning, not an error") {
  const TemplateSet templates = TemplateSet::load(testsupport::templates_dir());
  ReplayProvider provider = one_shot("drone deliveries", opinion_blocks(9));

  OpinionSet set = generate_opinion_set("drone deliveries", provider, templates);
  CHECK(set.entries.size() == 9);
  REQUIRE(set.warnings.size() == 1);
  CHECK(set.warnings[0] == "expected 10 opinions, got 9");
}

TEST_CASE("an unparseable opinion reply throws with the topic named") {
  const TemplateSet templates = TemplateSet::load(testsupport::templates_dir());
  ReplayProvider provider = one_shot("drone deliveries", "nothing structured here");
  CHECK_THROWS_WITH_AS(generate_opinion_set("drone deliveries", provider, templates),
                       doctest::Contains("'drone deliveries' unusable"),
                       std::runtime_error);
}

TEST_CASE("supporter ranking normalizes, counts and dense-ranks") {
  std::vector<OpinionSet> sets;
  sets.push_back(set_with_supporters({{"Urban Planners", " cyclists "},
                                      {"urban  planners", "Bus Riders"}}));
  sets.push_back(set_with_supporters({{"URBAN PLANNERS", "bus riders", "   ",
                                       "Drivers"}}));

  std::vector<SupporterRank> ranks = rank_supporters(sets);
  REQUIRE(ranks.size() == 4);
  CHECK(ranks[0] == SupporterRank{"urban planners", 3, 1});
  CHECK(ranks[1] == SupporterRank{"bus riders", 2, 2});
  // tied mentions share a dense rank, first appearance first
  CHECK(ranks[2] == SupporterRank{"cyclists", 1, 3});
  CHECK(ranks[3] == SupporterRank{"drivers", 1, 3});

  CHECK(rank_supporters({}).empty());
}

TEST_CASE("profile generation round-trips a complete reply") {
  const TemplateSet templates = TemplateSet::load(testsupport::templates_dir());
  const std::string reply =
      testsupport::slurp(testsupport::mini_dir() + "/profiles/wei_lin.txt");
  ReplayProvider provider = one_shot("A retired ferry captain", reply);

  std::vector<std::string> warnings;
  ProfileDoc doc = generate_profile("A retired ferry captain", provider, templates,
                                    &warnings);
  CHECK(doc.to_text() == reply);
  CHECK(warnings.empty());
}

TEST_CASE("profile generation fills gaps above the floor, rejects below it") {
  const TemplateSet templates = TemplateSet::load(testsupport::templates_dir());
  const auto& keys = canonical_profile_keys();

  auto reply_with = [&](std::size_t count) {
    std::string s;
    for (std::size_t i = 0; i < count; ++i) {
      s += std::string(keys[i]) + ": value " + std::to_string(i) + "\n";
    }
    return s;
  };

  SUBCASE("twelve keys pass with fill warnings") {
    ReplayProvider provider = one_shot("ferry captain", reply_with(12));
    std::vector<std::string> warnings;
    ProfileDoc doc = generate_profile("ferry captain", provider, templates, &warnings);
    CHECK(doc.attributes.size() == kCanonicalProfileKeyCount);
    std::size_t fills = 0;
    for (const auto& w : warnings) {
      if (w.find("missing profile key filled empty") != std::string::npos) ++fills;
    }
    CHECK(fills == 10);
  }
  SUBCASE("nine keys fail") {
    ReplayProvider provider = one_shot("ferry captain", reply_with(9));
    CHECK_THROWS_WITH_AS(generate_profile("ferry captain", provider, templates),
                         doctest::Contains("recovered only 9 of 22"),
                         std::runtime_error);
  }
}

TEST_CASE("review sheet export writes unset flags") {
  testsupport::TempDir tmp;
  OpinionSet set = set_with_supporters({{"A"}, {"B"}});
  set.entries[0].opinion = "First claim.";
  set.entries[1].opinion = "Second claim.";
  export_review_sheet("drones", set, tmp.file("sheet.json"));

  json sheet = json::parse(testsupport::slurp(tmp.file("sheet.json")));
  CHECK(sheet["topic_id"] == "drones");
  REQUIRE(sheet["entries"].size() == 2);
  for (const auto& e : sheet["entries"]) {
    for (const char* flag : {"relevance", "distinctiveness", "clarity",
                             "contextual_truth"}) {
      CHECK(e["flags"][flag].is_null());
    }
  }
  CHECK(sheet["entries"][0]["opinion"] == "First claim.");

  // a fresh sheet has nothing accepted yet
  Questionnaire q = import_review_sheet(tmp.file("sheet.json"));
  CHECK(q.topic_id == "drones");
  CHECK(q.questions.empty());
}

TEST_CASE("review sheet import keeps only fully flagged rows, edits included") {
  testsupport::TempDir tmp;
  OpinionSet set = set_with_supporters({{"A"}, {"B"}, {"C"}});
  set.entries[0].opinion = "Keep me.";
  set.entries[1].opinion = "Drop me.";
  set.entries[2].opinion = "Original wording.";
  export_review_sheet("drones", set, tmp.file("sheet.json"));

  json sheet = json::parse(testsupport::slurp(tmp.file("sheet.json")));
  auto set_flags = [&](std::size_t i, json value) {
    for (const char* flag : {"relevance", "distinctiveness", "clarity",
                             "contextual_truth"}) {
      sheet["entries"][i]["flags"][flag] = value;
    }
  };
  set_flags(0, true);
  set_flags(1, true);
  sheet["entries"][1]["flags"]["clarity"] = false;  // one veto excludes the row
  set_flags(2, true);
  sheet["entries"][2]["opinion"] = "Reworded by the annotator.";
  testsupport::spit(tmp.file("sheet.json"), sheet.dump(2) + "\n");

  Questionnaire q = import_review_sheet(tmp.file("sheet.json"));
  REQUIRE(q.questions.size() == 2);
  CHECK(q.questions[0].id == "q1");
  CHECK(q.questions[0].statement == "Keep me.");
  CHECK(q.questions[0].topic_id == "drones");
  CHECK(q.questions[1].id == "q3");
  CHECK(q.questions[1].statement == "Reworded by the annotator.");
}

TEST_CASE("review sheet import validation") {
  testsupport::TempDir tmp;
  OpinionSet set = set_with_supporters({{"A"}, {"B"}});
  export_review_sheet("drones", set, tmp.file("sheet.json"));
  json sheet = json::parse(testsupport::slurp(tmp.file("sheet.json")));

  SUBCASE("a flag that is not null or boolean names its row") {
    sheet["entries"][1]["flags"]["clarity"] = "maybe";
    testsupport::spit(tmp.file("bad.json"), sheet.dump(2));
    CHECK_THROWS_WITH_AS(import_review_sheet(tmp.file("bad.json")),
                         doctest::Contains("/entries/1/flags/clarity"), ConfigError);
  }
  SUBCASE("a missing flag key names itself") {
    sheet["entries"][0]["flags"].erase("relevance");
    testsupport::spit(tmp.file("bad.json"), sheet.dump(2));
    CHECK_THROWS_WITH_AS(import_review_sheet(tmp.file("bad.json")),
                         doctest::Contains("/flags/relevance: missing"), ConfigError);
  }
  SUBCASE("duplicate accepted numbers collide") {
    for (std::size_t i = 0; i < 2; ++i) {
      sheet["entries"][i]["number"] = 7;
      for (const char* flag : {"relevance", "distinctiveness", "clarity",
                               "contextual_truth"}) {
        sheet["entries"][i]["flags"][flag] = true;
      }
    }
    testsupport::spit(tmp.file("bad.json"), sheet.dump(2));
    CHECK_THROWS_WITH_AS(import_review_sheet(tmp.file("bad.json")),
                         doctest::Contains("duplicate accepted entry number 7"),
                         ConfigError);
  }
  SUBCASE("missing topic_id") {
    sheet.erase("topic_id");
    testsupport::spit(tmp.file("bad.json"), sheet.dump(2));
    CHECK_THROWS_WITH_AS(import_review_sheet(tmp.file("bad.json")),
                         doctest::Contains("topic_id"), ConfigError);
  }
  SUBCASE("not json at all") {
    testsupport::spit(tmp.file("bad.json"), "[[");
    CHECK_THROWS_AS(import_review_sheet(tmp.file("bad.json")), ConfigError);
  }
}
