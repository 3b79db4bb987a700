#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "cogbench/profile.hpp"
#include "support.hpp"

using namespace cogbench;

namespace {

std::string full_profile_text() {
  std::string text;
  for (std::string_view k : canonical_profile_keys()) {
    text += std::string(k) + ": v_" + std::string(k) + "\n";
  }
  return text;
}

bool has_warning(const ProfileParseStats& st, std::string_view needle) {
  return std::any_of(st.warnings.begin(), st.warnings.end(), [&](const std::string& w) {
    return w.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("canonical key set") {
  const auto& keys = canonical_profile_keys();
  CHECK(keys.size() == 22);
  CHECK(keys.front() == "Name");
  CHECK(keys.back() == "Future Outlook");
  CHECK(canonical_profile_key("name") == "Name");
  CHECK(canonical_profile_key("PLACE OF BIRTH") == "Place of Birth");
  CHECK(canonical_profile_key("place  of birth") == "Place of Birth");
  CHECK(canonical_profile_key("Motto").empty());
}

TEST_CASE("full profile parses clean and round-trips") {
  ProfileParseStats st;
  ProfileDoc doc = parse_profile_lines(full_profile_text(), &st);
  CHECK(st.canonical_recovered == 22);
  CHECK(st.warnings.empty());
  CHECK(doc.extras.empty());
  CHECK(doc.attributes.size() == 22);
  CHECK(doc.value("Age") == "v_Age");
  CHECK(doc.to_text() == full_profile_text());
  // and the round trip is a fixed point
  ProfileDoc again = parse_profile_lines(doc.to_text());
  CHECK(again == doc);
}

TEST_CASE("case-insensitive keys stored with canonical spelling") {
  ProfileDoc doc = parse_profile_lines("NAME: Wei\nfuture outlook: calm seas\n");
  CHECK(doc.value("Name") == "Wei");
  CHECK(doc.value("Future Outlook") == "calm seas");
}

TEST_CASE("duplicate canonical key warns and keeps the last value") {
  ProfileParseStats st;
  ProfileDoc doc = parse_profile_lines("Name: First\nName: Second\n", &st);
  CHECK(doc.value("Name") == "Second");
  CHECK(has_warning(st, "duplicate profile key: Name"));
  // still exactly one Name attribute
  std::size_t names = 0;
  for (const auto& [k, v] : doc.attributes) {
    if (k == "Name") ++names;
  }
  CHECK(names == 1);
}

TEST_CASE("unknown key lands in extras with a warning") {
  ProfileParseStats st;
  ProfileDoc doc = parse_profile_lines("Name: Wei\nMotto: carpe diem\n", &st);
  REQUIRE(doc.extras.size() == 1);
  CHECK(doc.extras[0].first == "Motto");
  CHECK(doc.extras[0].second == "carpe diem");
  CHECK(has_warning(st, "unknown profile key moved to extras: Motto"));
}

TEST_CASE("continuation lines append to the previous value") {
  ProfileDoc doc = parse_profile_lines("Hobbies: reading\nand long walks\n");
  CHECK(doc.value("Hobbies") == "reading and long walks");
}

TEST_CASE("list markers are stripped from keys") {
  ProfileDoc doc = parse_profile_lines("- Name: Wei\n* Age: 30\n");
  CHECK(doc.value("Name") == "Wei");
  CHECK(doc.value("Age") == "30");
}

TEST_CASE("prose with a colon is not mistaken for a key") {
  // key side contains a period, so the whole line continues the prior value
  ProfileDoc doc = parse_profile_lines("Name: Wei\nP.S.: remember this\n");
  CHECK(doc.value("Name") == "Wei P.S.: remember this");
  CHECK(doc.extras.empty());
}

TEST_CASE("missing canonical keys are filled empty with warnings") {
  ProfileParseStats st;
  ProfileDoc doc = parse_profile_lines("Name: Wei\n", &st);
  CHECK(st.canonical_recovered == 1);
  CHECK(doc.attributes.size() == 22);
  CHECK(doc.value("Age") == "");
  CHECK(has_warning(st, "missing profile key filled empty: Age"));
  // one warning per missing key
  std::size_t fills = 0;
  for (const auto& w : st.warnings) {
    if (w.find("missing profile key filled empty") != std::string::npos) ++fills;
  }
  CHECK(fills == 21);
}

TEST_CASE("value length warning triggers at 30 characters") {
  const std::string v29(29, 'x');
  const std::string v30(30, 'x');
  ProfileParseStats st29;
  parse_profile_lines(full_profile_text() + "Name: " + v29 + "\n", &st29);
  CHECK(!has_warning(st29, "not under 30 characters"));
  ProfileParseStats st30;
  parse_profile_lines(full_profile_text() + "Name: " + v30 + "\n", &st30);
  CHECK(has_warning(st30, "profile value not under 30 characters: Name"));
}

TEST_CASE("fill_missing_canonical is idempotent") {
  ProfileDoc doc;
  doc.set("Name", "Wei");
  doc.fill_missing_canonical();
  const ProfileDoc once = doc;
  doc.fill_missing_canonical();
  CHECK(doc == once);
  CHECK(doc.missing_canonical().empty());
}

TEST_CASE("set routes canonical and unknown keys") {
  ProfileDoc doc;
  doc.set("name", "Wei");
  doc.set("Name", "Lin");
  doc.set("Motto", "onward");
  CHECK(doc.attributes.size() == 1);
  CHECK(doc.value("Name") == "Lin");
  REQUIRE(doc.extras.size() == 1);
  CHECK(doc.extras[0].first == "Motto");
}
