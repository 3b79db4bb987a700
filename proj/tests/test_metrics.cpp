#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "cogbench/metrics.hpp"
#include "cogbench/util.hpp"
#include "support.hpp"

using namespace cogbench;
using testsupport::TempDir;
using testsupport::slurp;
using testsupport::spit;

TEST_CASE("cohen kappa hand-checked oracles") {
  // po = 3/4, pe = (2*1 + 1*2 + 1*1)/16 = 5/16 -> kappa = 7/11
  CHECK(cohen_kappa({5, 5, 3, 1}, {5, 3, 3, 1}) == doctest::Approx(7.0 / 11.0).epsilon(1e-9));
  // zero observed agreement with each rater constant: po = 0, pe = 0
  CHECK(cohen_kappa({5, 5, 5}, {1, 1, 1}) == doctest::Approx(0.0).epsilon(1e-9));
  // perfect agreement is 1 even when chance agreement is also 1
  CHECK(cohen_kappa({4, 4, 4}, {4, 4, 4}) == 1.0);
  CHECK(cohen_kappa({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK_THROWS_AS(cohen_kappa({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(cohen_kappa({}, {}), std::invalid_argument);
}

TEST_CASE("cohen kappa is symmetric and relabeling-invariant") {
  testsupport::Rng rng(101);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = rng.uniform(1, 40);
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform(1, 5);
      b[i] = rng.uniform(1, 5);
    }
    const double k1 = cohen_kappa(a, b);
    CHECK(cohen_kappa(b, a) == doctest::Approx(k1).epsilon(1e-12));

    // permute the category labels consistently on both raters
    int perm[6] = {0, 1, 2, 3, 4, 5};
    for (int i = 5; i > 1; --i) std::swap(perm[i], perm[rng.uniform(1, i)]);
    std::vector<int> pa(n), pb(n);
    for (int i = 0; i < n; ++i) {
      pa[i] = perm[a[i]];
      pb[i] = perm[b[i]];
    }
    CHECK(cohen_kappa(pa, pb) == doctest::Approx(k1).epsilon(1e-12));
  }
}

TEST_CASE("fleiss kappa fixture and edges") {
  // 3 raters, 2 items: [[3,0],[2,1]] -> Pbar = 2/3, Pe = 13/18, kappa = -0.2
  CHECK(fleiss_kappa({{3, 0}, {2, 1}}) == doctest::Approx(-0.2).epsilon(1e-9));
  // unanimous raters on every item
  CHECK(fleiss_kappa({{4, 0}, {0, 4}}) == 1.0);
  CHECK_THROWS_AS(fleiss_kappa({}), std::invalid_argument);
  CHECK_THROWS_AS(fleiss_kappa({{2, 1}, {1, 1}}), std::invalid_argument);  // ragged rows
  CHECK_THROWS_AS(fleiss_kappa({{1, 0}}), std::invalid_argument);          // single rater

  // ratings-form convenience agrees with the count form
  CHECK(fleiss_kappa_ratings({{1, 1, 1}, {1, 1, 2}}, 2) ==
        doctest::Approx(fleiss_kappa({{3, 0}, {2, 1}})).epsilon(1e-12));
}

TEST_CASE("polarity mapping") {
  CHECK(to_polarity(1) == Polarity::negative);
  CHECK(to_polarity(2) == Polarity::negative);
  CHECK(to_polarity(3) == Polarity::neutral);
  CHECK(to_polarity(4) == Polarity::positive);
  CHECK(to_polarity(5) == Polarity::positive);
  CHECK_THROWS_AS(to_polarity(0), std::invalid_argument);
  CHECK_THROWS_AS(to_polarity(6), std::invalid_argument);

  // 1 and 2 collapse to the same class, so polarity agreement is perfect here
  CHECK(fleiss_kappa_polarity({{1, 2, 1}, {5, 4, 4}}) == 1.0);
  // and equals fleiss over explicit polarity counts otherwise
  CHECK(fleiss_kappa_polarity({{1, 3, 4}, {2, 3, 5}}) ==
        doctest::Approx(fleiss_kappa({{1, 1, 1}, {1, 1, 1}})).epsilon(1e-12));
}

TEST_CASE("spearman rho oracle and edges") {
  auto rho = spearman_rho({1, 2, 2, 4}, {1, 3, 2, 4});
  REQUIRE(rho.has_value());
  CHECK(*rho == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-9));
  CHECK(*rho == doctest::Approx(0.9486832980505138).epsilon(1e-9));

  CHECK(*spearman_rho({1, 2, 3}, {10, 20, 30}) == doctest::Approx(1.0));
  CHECK(*spearman_rho({1, 2, 3}, {9, 5, 1}) == doctest::Approx(-1.0));
  CHECK(!spearman_rho({2, 2, 2}, {1, 2, 3}).has_value());  // constant side
  CHECK(!spearman_rho({1}, {1}).has_value());              // n < 2
  CHECK(!spearman_rho({}, {}).has_value());
  CHECK_THROWS_AS(spearman_rho({1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("spearman rho is invariant under strictly monotone transforms") {
  testsupport::Rng rng(555);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = rng.uniform(2, 30);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.uniform(1, 10);
      y[i] = rng.uniform(1, 10);
    }
    auto base = spearman_rho(x, y);
    // strictly increasing piecewise map on integer values 1..10
    double map[11];
    double acc = -5.0;
    for (int v = 1; v <= 10; ++v) {
      acc += 0.25 + rng.unit() * 3.0;
      map[v] = acc;
    }
    std::vector<double> tx(n);
    for (int i = 0; i < n; ++i) tx[i] = map[static_cast<int>(x[i])];
    auto mapped = spearman_rho(tx, y);
    REQUIRE(base.has_value() == mapped.has_value());
    if (base.has_value()) CHECK(*mapped == doctest::Approx(*base).epsilon(1e-9));
  }
}

TEST_CASE("majority rating oracles") {
  CHECK(majority_rating({5, 5, 4, 3, 3, 3, 1}) == 3);  // outright mode
  // modes 5 and 4 tie on count 2; median is 4, so 4 wins
  CHECK(majority_rating({5, 5, 4, 4, 3, 2, 1}) == 4);
  CHECK(majority_rating({2}) == 2);
  // equidistant from the median: lower rating wins
  CHECK(majority_rating({1, 1, 5, 5}) == 1);
  CHECK(majority_rating({2, 2, 4, 4}) == 2);
  CHECK(majority_rating({3, 3, 4, 4}) == 3);  // median 3.5; 3 and 4 equidistant -> lower? no: |3-3.5| == |4-3.5| -> 3
  CHECK_THROWS_AS(majority_rating({}), std::invalid_argument);
  CHECK_THROWS_AS(majority_rating({0}), std::invalid_argument);
  CHECK_THROWS_AS(majority_rating({6}), std::invalid_argument);
}

TEST_CASE("majority rating is always one of the votes") {
  testsupport::Rng rng(77);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = rng.uniform(1, 15);
    std::vector<int> votes(n);
    for (int i = 0; i < n; ++i) votes[i] = rng.uniform(1, 5);
    const int m = majority_rating(votes);
    CHECK(std::count(votes.begin(), votes.end(), m) > 0);
    // no rating strictly outnumbers the winner
    for (int v = 1; v <= 5; ++v) {
      CHECK(std::count(votes.begin(), votes.end(), v) <=
            std::count(votes.begin(), votes.end(), m));
    }
  }
}

TEST_CASE("rating records load from both accepted shapes") {
  TempDir tmp;
  spit(tmp.file("bare.json"),
       R"([{"annotator_id":"a1","topic_id":"t","iteration":0,"question_id":"q1","rating":4}])");
  auto bare = load_rating_records(tmp.file("bare.json"));
  REQUIRE(bare.size() == 1);
  CHECK(bare[0].annotator_id == "a1");
  CHECK(bare[0].value == 4);

  spit(tmp.file("wrapped.json"),
       R"({"records":[{"annotator_id":"a2","topic_id":"t","iteration":3,"question_id":"q9","score":2}]})");
  auto wrapped = load_rating_records(tmp.file("wrapped.json"));
  REQUIRE(wrapped.size() == 1);
  CHECK(wrapped[0].iteration == 3);
  CHECK(wrapped[0].value == 2);  // "score" accepted as the value key

  spit(tmp.file("bad.json"),
       R"([{"annotator_id":"a1","topic_id":"t","iteration":0,"question_id":"q1","rating":9}])");
  CHECK_THROWS_WITH_AS(load_rating_records(tmp.file("bad.json")), doctest::Contains("0"),
                       ConfigError);
  spit(tmp.file("noval.json"),
       R"([{"annotator_id":"a1","topic_id":"t","iteration":0,"question_id":"q1"}])");
  CHECK_THROWS_AS(load_rating_records(tmp.file("noval.json")), ConfigError);
  spit(tmp.file("notjson.json"), "zap");
  CHECK_THROWS_AS(load_rating_records(tmp.file("notjson.json")), ConfigError);
}

namespace {

// panel builder: one record per annotator with a fixed rating vector
void add_panel(std::vector<RatingRecord>& panel, const std::string& topic, int iteration,
               const std::string& qid, const std::vector<int>& ratings) {
  for (std::size_t a = 0; a < ratings.size(); ++a) {
    panel.push_back(RatingRecord{"a" + std::to_string(a + 1), topic, iteration, qid, ratings[a]});
  }
}

}  // namespace

TEST_CASE("report authenticity is kappa against the per-question majority") {
  std::vector<ModelAnswer> answers = {
      {"t1", 0, "q1", 5}, {"t1", 0, "q2", 3}, {"t1", 0, "q3", 1}, {"t1", 0, "q4", 5}};
  std::vector<RatingRecord> auth;
  add_panel(auth, "t1", 0, "q1", {5, 5, 4});  // majority 5
  add_panel(auth, "t1", 0, "q2", {3, 3, 2});  // majority 3
  add_panel(auth, "t1", 0, "q3", {3, 3, 1});  // majority 3 (model says 1)
  add_panel(auth, "t1", 0, "q4", {5, 5, 5});  // majority 5

  ReportData rep = build_report("coggpt", "a", answers, auth, {});
  REQUIRE(rep.authenticity.per_iteration.count(0) == 1);
  // model [5,3,1,5] vs majority [5,3,3,5]
  CHECK(rep.authenticity.per_iteration.at(0) ==
        doctest::Approx(cohen_kappa({5, 3, 1, 5}, {5, 3, 3, 5})).epsilon(1e-12));
  REQUIRE(rep.authenticity.avg.has_value());
  // an empty rationality panel is an opt-out: no values, no warnings
  CHECK(!rep.rationality.avg.has_value());
  CHECK(rep.warnings.empty());
}

TEST_CASE("report authenticity averages over topics") {
  std::vector<ModelAnswer> answers = {
      {"t1", 0, "q1", 5}, {"t1", 0, "q2", 1},
      {"t2", 0, "q1", 2}, {"t2", 0, "q2", 4}};
  std::vector<RatingRecord> auth;
  add_panel(auth, "t1", 0, "q1", {5});  // perfect agreement on t1
  add_panel(auth, "t1", 0, "q2", {1});
  add_panel(auth, "t2", 0, "q1", {4});  // zero agreement on t2, constant-free
  add_panel(auth, "t2", 0, "q2", {2});
  ReportData rep = build_report("coggpt", "a", answers, auth, {});
  const double t2 = cohen_kappa({2, 4}, {4, 2});
  CHECK(rep.authenticity.per_iteration.at(0) == doctest::Approx((1.0 + t2) / 2.0).epsilon(1e-12));
}

TEST_CASE("literal per-question agreement reduces to the match fraction") {
  std::vector<ModelAnswer> answers = {
      {"t1", 0, "q1", 5}, {"t1", 0, "q2", 3}, {"t1", 0, "q3", 1}, {"t1", 0, "q4", 5}};
  std::vector<RatingRecord> auth;
  add_panel(auth, "t1", 0, "q1", {5, 5, 4});
  add_panel(auth, "t1", 0, "q2", {3, 3, 2});
  add_panel(auth, "t1", 0, "q3", {3, 3, 1});
  add_panel(auth, "t1", 0, "q4", {5, 5, 5});
  ReportOptions opts;
  opts.per_question_agreement = true;
  ReportData rep = build_report("coggpt", "a", answers, auth, {}, opts);
  // 3 of 4 majorities match the model
  CHECK(rep.authenticity.per_iteration.at(0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("report rationality takes per-question majorities then the mean") {
  std::vector<ModelAnswer> answers = {{"t1", 2, "q1", 3}, {"t1", 2, "q2", 3}};
  std::vector<RatingRecord> rat;
  add_panel(rat, "t1", 2, "q1", {4, 4, 2});  // majority 4
  add_panel(rat, "t1", 2, "q2", {1, 1, 5});  // majority 1
  ReportData rep = build_report("coggpt", "a", answers, {}, rat);
  REQUIRE(rep.rationality.per_iteration.count(2) == 1);
  CHECK(rep.rationality.per_iteration.at(2) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(!rep.authenticity.avg.has_value());
}

TEST_CASE("summary fields pick out iterations 5 and 10") {
  std::vector<ModelAnswer> answers;
  std::vector<RatingRecord> auth;
  for (int t : {0, 5, 10}) {
    answers.push_back({"t1", t, "q1", t == 5 ? 2 : 4});
    answers.push_back({"t1", t, "q2", 4});
    add_panel(auth, "t1", t, "q1", {4, 4});
    add_panel(auth, "t1", t, "q2", {2, 2});
  }
  ReportData rep = build_report("coggpt", "a", answers, auth, {});
  REQUIRE(rep.authenticity.at_5.has_value());
  REQUIRE(rep.authenticity.at_10.has_value());
  const double k5 = cohen_kappa({2, 4}, {4, 2});
  const double k10 = cohen_kappa({4, 4}, {4, 2});
  CHECK(*rep.authenticity.at_5 == doctest::Approx(k5).epsilon(1e-12));
  CHECK(*rep.authenticity.at_10 == doctest::Approx(k10).epsilon(1e-12));
  CHECK(*rep.authenticity.avg ==
        doctest::Approx((cohen_kappa({4, 4}, {4, 2}) + k5 + k10) / 3.0).epsilon(1e-12));
}

TEST_CASE("coverage gaps produce warnings, not failures") {
  std::vector<ModelAnswer> answers = {{"t1", 0, "q1", 3}};
  std::vector<RatingRecord> auth;
  add_panel(auth, "t2", 0, "q1", {3, 3});  // different topic entirely
  ReportData rep = build_report("coggpt", "a", answers, auth, {});
  CHECK(rep.authenticity.per_iteration.empty());
  CHECK(!rep.warnings.empty());
}

TEST_CASE("report files match the golden run") {
  // rebuild the coggpt report from the golden sessions and the bundled panels
  std::vector<ModelAnswer> answers;
  for (const char* topic : {"fishing", "yoga"}) {
    nlohmann::json log = nlohmann::json::parse(
        slurp(testsupport::goldens_dir() + "/coggpt_a_" + topic + "_wei_lin/session.json"));
    for (const auto& rec : log["records"]) {
      for (const auto& ans : rec["answers"]) {
        answers.push_back(ModelAnswer{topic, rec["iteration"].get<int>(),
                                      ans["question_id"].get<std::string>(),
                                      ans["rating"].get<int>()});
      }
    }
  }
  auto auth = load_rating_records(testsupport::data_dir() + "/humans/authenticity.json");
  auto rat = load_rating_records(testsupport::data_dir() + "/humans/rationality.json");
  ReportData rep = build_report("coggpt", "a", answers, auth, rat);

  TempDir tmp;
  write_report_json(rep, tmp.file("report_coggpt_a.json"));
  write_report_csv(rep, tmp.file("report_coggpt_a.csv"));
  CHECK(slurp(tmp.file("report_coggpt_a.json")) ==
        slurp(testsupport::goldens_dir() + "/reports/report_coggpt_a.json"));
  CHECK(slurp(tmp.file("report_coggpt_a.csv")) ==
        slurp(testsupport::goldens_dir() + "/reports/report_coggpt_a.csv"));
}
