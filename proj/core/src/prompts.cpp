#include "cogbench/prompts.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <set>

#include "cogbench/util.hpp"

namespace cogbench {

namespace {

struct TemplateInfo {
  TemplateId id;
  std::string_view name;
  std::uint64_t digest;  // FNV-1a 64 of the shipped file bytes
};

constexpr std::array<TemplateInfo, 5> kTemplates = {{
    {TemplateId::profile_update, "profile_update", 0x99952bdf625b4fc9ull},
    {TemplateId::knowledge_distill, "knowledge_distill", 0x41c6b38d775b717dull},
    {TemplateId::interpret, "interpret", 0xbe0584d35e101831ull},
    {TemplateId::questionnaire_design, "questionnaire_design", 0x1223520b202a8c50ull},
    {TemplateId::profile_create, "profile_create", 0x74db94d53dc4dee2ull},
}};

const TemplateInfo& info_for(TemplateId id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown template id");
}

}  // namespace

std::string_view template_id_name(TemplateId id) { return info_for(id).name; }

TemplateSet TemplateSet::load(const std::string& dir) {
  TemplateSet set;
  for (const auto& t : kTemplates) {
    const std::string path = (std::filesystem::path(dir) / (std::string(t.name) + ".txt")).string();
    std::string body = read_file(path);
    const std::uint64_t got = fnv1a64(body);
    if (got != t.digest) {
      throw ConfigError("template digest mismatch for " + path + ": expected " +
                        hex64(t.digest) + ", file hashes to " + hex64(got));
    }
    set.bodies_.emplace(t.id, std::move(body));
  }
  return set;
}

const std::string& TemplateSet::body(TemplateId id) const {
  auto it = bodies_.find(id);
  if (it == bodies_.end()) throw ConfigError("template not loaded: " + std::string(template_id_name(id)));
  return it->second;
}

std::uint64_t TemplateSet::pinned_digest(TemplateId id) { return info_for(id).digest; }

bool is_known_placeholder(std::string_view name) {
  return name == "profile" || name == "memory" || name == "question" ||
         name == "topic" || name == "character" || name == "information" ||
         name == "observation" || name == "reflection" ||
         name == "previous_answer" || name == "feedback";
}

std::string render_template(std::string_view body,
                            const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    // candidate placeholder: '{' [a-z_]+ '}'
    std::size_t j = i + 1;
    while (j < body.size() && (body[j] == '_' || (body[j] >= 'a' && body[j] <= 'z'))) ++j;
    if (j > i + 1 && j < body.size() && body[j] == '}') {
      const std::string name(body.substr(i + 1, j - i - 1));
      auto it = bindings.find(name);
      if (it == bindings.end()) {
        throw ConfigError("missing binding for placeholder {" + name + "}");
      }
      out.append(it->second);
      i = j + 1;
    } else {
      out.push_back('{');
      ++i;
    }
  }
  return out;
}

namespace {

// Locates `header` at a line start (case-insensitive, leading whitespace
// allowed), searching from `from`. Returns npos or the offset just past the
// header token; *line_start receives the matched line's offset, which is the
// previous section's end.
std::size_t find_header(std::string_view text, std::string_view header, std::size_t from,
                        std::size_t* line_start = nullptr) {
  std::size_t at = from;
  while (at <= text.size()) {
    std::size_t eol = text.find('\n', at);
    if (eol == std::string_view::npos) eol = text.size();
    std::size_t p = at;
    while (p < eol && (text[p] == ' ' || text[p] == '\t')) ++p;
    if (p + header.size() <= eol && iequals(text.substr(p, header.size()), header)) {
      if (line_start) *line_start = at;
      return p + header.size();
    }
    if (eol == text.size()) break;
    at = eol + 1;
  }
  return std::string_view::npos;
}

}  // namespace

Result<ParsedProfileUpdate> parse_profile_update(std::string_view text) {
  using R = Result<ParsedProfileUpdate>;
  std::size_t t_line = 0;
  std::size_t p_line = 0;
  const std::size_t a_end = find_header(text, "assessments:", 0);
  if (a_end == std::string_view::npos) return R::fail("missing \"Assessments:\" header");
  const std::size_t t_end = find_header(text, "thoughts:", a_end, &t_line);
  if (t_end == std::string_view::npos) return R::fail("missing \"Thoughts:\" header");
  const std::size_t p_end = find_header(text, "updated profile:", t_end, &p_line);
  if (p_end == std::string_view::npos) return R::fail("missing \"Updated Profile:\" header");

  ParsedProfileUpdate parsed;
  // each section runs from its header to the next header's line start
  parsed.assessments = trim(text.substr(a_end, t_line - a_end));
  parsed.thoughts = trim(text.substr(t_end, p_line - t_end));

  ProfileParseStats stats;
  parsed.updated_profile = parse_profile_lines(text.substr(p_end), &stats);
  parsed.warnings = std::move(stats.warnings);
  if (stats.canonical_recovered == 0) {
    return R::fail("no canonical profile keys found after \"Updated Profile:\"");
  }
  return R::ok(std::move(parsed));
}

namespace {

// Extracts the balanced bracket run starting at `start` (which must index a
// '['), skipping string literals while matching brackets. Empty when the run
// never closes or closes with the wrong bracket.
std::string_view balanced_run_at(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
      if (depth == 0) {
        if (c == ']') return text.substr(start, i - start + 1);
        return {};  // mismatched closer
      }
      if (depth < 0) return {};
    }
  }
  return {};
}

}  // namespace

Result<std::vector<KnowledgeDraft>> parse_knowledge_list(std::string_view text,
                                                         const KnowledgeParseOptions& opts) {
  using R = Result<std::vector<KnowledgeDraft>>;
  // The reply may wrap the array in prose or code fences and may even use
  // brackets in the prose, so every balanced run is a candidate until one
  // decodes as a JSON array.
  nlohmann::json arr;
  bool balanced_seen = false;
  bool decoded = false;
  for (std::size_t start = text.find('['); start != std::string_view::npos;
       start = text.find('[', start + 1)) {
    std::string_view raw = balanced_run_at(text, start);
    if (raw.empty()) continue;
    balanced_seen = true;
    arr = nlohmann::json::parse(raw, nullptr, false);
    if (!arr.is_discarded() && arr.is_array()) {
      decoded = true;
      break;
    }
  }
  if (!decoded) {
    return R::fail(balanced_seen ? "text after '[' does not parse as a JSON array"
                                 : "no JSON array found in reply");
  }

  std::vector<KnowledgeDraft> drafts;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const nlohmann::json& e = arr[i];
    const std::string at = "element " + std::to_string(i);
    auto bad = [&](const std::string& why) -> std::optional<std::string> {
      if (opts.skip_bad_elements) return std::nullopt;
      return at + ": " + why;
    };
    if (!e.is_object()) {
      if (auto err = bad("not an object")) return R::fail(*err);
      continue;
    }
    if (!e.contains("thoughts") || !e["thoughts"].is_string()) {
      if (auto err = bad("missing string key \"thoughts\"")) return R::fail(*err);
      continue;
    }
    if (!e.contains("knowledge") || !e["knowledge"].is_string() ||
        e["knowledge"].get<std::string>().empty()) {
      if (auto err = bad("missing or empty string key \"knowledge\"")) return R::fail(*err);
      continue;
    }
    if (!e.contains("score")) {
      if (auto err = bad("missing key \"score\"")) return R::fail(*err);
      continue;
    }
    const nlohmann::json& s = e["score"];
    long long score = 0;
    if (s.is_number_integer()) {
      score = s.get<long long>();
    } else if (s.is_number_float() && s.get<double>() == static_cast<long long>(s.get<double>())) {
      score = static_cast<long long>(s.get<double>());
    } else {
      if (auto err = bad("\"score\" is not an integer")) return R::fail(*err);
      continue;
    }
    if (score < 1 || score > 5) {
      if (auto err = bad("score " + std::to_string(score) + " outside 1..5")) return R::fail(*err);
      continue;
    }
    drafts.push_back(KnowledgeDraft{e["thoughts"].get<std::string>(),
                                    e["knowledge"].get<std::string>(),
                                    static_cast<int>(score)});
  }
  return R::ok(std::move(drafts));
}

Result<ParsedInterpretation> parse_interpretation(std::string_view text) {
  using R = Result<ParsedInterpretation>;
  std::size_t head = 0;  // the Rating line's start ends the reasoning section
  const std::size_t r_end = find_header(text, "rating:", 0, &head);
  if (r_end == std::string_view::npos) return R::fail("missing \"Rating:\" header");

  ParsedInterpretation parsed;
  const std::size_t t_end = find_header(text.substr(0, head), "thoughts:", 0);
  if (t_end != std::string_view::npos) {
    parsed.thoughts = trim(text.substr(t_end, head - t_end));
  } else {
    parsed.thoughts = trim(text.substr(0, head));
  }

  // first integer in 1..5 after the header; tolerates "4/5", "4 points"
  std::string_view tail = text.substr(r_end);
  for (std::size_t i = 0; i < tail.size();) {
    if (tail[i] >= '0' && tail[i] <= '9') {
      std::size_t j = i;
      long long v = 0;
      while (j < tail.size() && tail[j] >= '0' && tail[j] <= '9') {
        v = v * 10 + (tail[j] - '0');
        if (v > 1000000) break;
        ++j;
      }
      if (v >= 1 && v <= 5) {
        parsed.rating = static_cast<int>(v);
        return R::ok(std::move(parsed));
      }
      i = j;
    } else {
      ++i;
    }
  }
  return R::fail("no integer in 1..5 after \"Rating:\"");
}

namespace {

const std::array<std::string_view, 5> kOpinionFields = {
    "number", "perspective", "opinion", "supporters", "reasons"};

int opinion_field_index(std::string_view line, std::size_t* value_at) {
  std::size_t p = 0;
  while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
  for (std::size_t f = 0; f < kOpinionFields.size(); ++f) {
    std::string_view name = kOpinionFields[f];
    if (p + name.size() < line.size() && iequals(line.substr(p, name.size()), name) &&
        line[p + name.size()] == ':') {
      *value_at = p + name.size() + 1;
      return static_cast<int>(f);
    }
  }
  return -1;
}

}  // namespace

Result<OpinionSet> parse_opinion_set(std::string_view text) {
  using R = Result<OpinionSet>;
  OpinionSet set;

  std::array<std::string, 5> fields;
  std::array<bool, 5> seen{};
  int current = -1;
  bool open = false;

  auto flush = [&]() {
    if (!open) return;
    open = false;
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
      set.warnings.push_back("discarded incomplete opinion block" +
                             (seen[0] ? " numbered " + trim(fields[0]) : std::string()));
      return;
    }
    OpinionEntry entry;
    try {
      entry.number = std::stoi(trim(fields[0]));
    } catch (const std::exception&) {
      set.warnings.push_back("discarded block with non-numeric Number: " + trim(fields[0]));
      return;
    }
    entry.perspective = trim(fields[1]);
    entry.opinion = trim(fields[2]);
    for (const std::string& s : split(fields[3], ',')) {
      std::string t = trim(s);
      if (!t.empty()) entry.supporters.push_back(std::move(t));
    }
    entry.reasons = trim(fields[4]);
    set.entries.push_back(std::move(entry));
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);

    std::size_t value_at = 0;
    int f = opinion_field_index(line, &value_at);
    if (f == 0) {  // "Number:" opens a new block
      flush();
      fields.fill("");
      seen.fill(false);
      open = true;
    }
    if (f >= 0 && open) {
      fields[static_cast<std::size_t>(f)] = std::string(trim(line.substr(value_at)));
      seen[static_cast<std::size_t>(f)] = true;
      current = f;
    } else if (f < 0 && open && current >= 0) {
      std::string cont = trim(line);
      if (!cont.empty()) {
        std::string& v = fields[static_cast<std::size_t>(current)];
        if (!v.empty()) v.push_back(' ');
        v.append(cont);
      }
    }
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  flush();

  if (set.entries.empty()) return R::fail("no complete opinion blocks found");
  std::set<int> numbers;
  for (const OpinionEntry& e : set.entries) {
    if (!numbers.insert(e.number).second) {
      return R::fail("duplicate opinion number " + std::to_string(e.number));
    }
  }
  return R::ok(std::move(set));
}

}  // namespace cogbench
