#include "wmw/parse.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <initializer_list>

#include "wmw/units.hpp"

namespace wmw {

namespace {

struct KeyAlias {
  std::string_view from;
  std::string_view to;
};

constexpr std::array<KeyAlias, 17> kTopLevelAliases = {{
    {"state0", "state_0"},        {"s0", "state_0"},          {"initial_state", "state_0"},
    {"state_zero", "state_0"},    {"state1", "state_1"},      {"s1", "state_1"},
    {"resulting_state", "state_1"}, {"final_state", "state_1"}, {"result_state", "state_1"},
    {"delta_s", "transition"},    {"transition_state", "transition"}, {"dynamics", "transition"},
    {"final_answer", "answer"},   {"family", "scenario_family"}, {"task_family", "scenario_family"},
    {"reasoning", "derivation"},  {"derivation_text", "derivation"},
}};

constexpr std::array<KeyAlias, 7> kState0Aliases = {{
    {"entities", "objects"},       {"relationships", "relations"}, {"spatial_relations", "relations"},
    {"force_list", "forces"},      {"quantities", "variables"},    {"vars", "variables"},
    {"assumption", "assumptions"},
}};

constexpr std::array<KeyAlias, 6> kTransitionAliases = {{
    {"law", "rule"},            {"physical_law", "rule"},     {"physical_rule", "rule"},
    {"predicted_effect", "effect"}, {"equations", "equation"}, {"support", "evidence"},
}};

constexpr std::array<KeyAlias, 5> kState1Aliases = {{
    {"change", "predicted_change"}, {"changes", "predicted_change"}, {"variables", "new_variables"},
    {"new_vars", "new_variables"},  {"resulting_variables", "new_variables"},
}};

constexpr std::array<KeyAlias, 6> kRelationAliases = {{
    {"relation", "type"}, {"predicate", "type"},  {"objects", "args"},
    {"between", "args"},  {"arguments", "args"},  {"entities", "args"},
}};

constexpr std::array<KeyAlias, 6> kForceAliases = {{
    {"dir", "direction"}, {"applied_to", "target"}, {"acts_on", "target"},
    {"on", "target"},     {"object", "target"},     {"units", "unit"},
}};

constexpr std::array<KeyAlias, 15> kRelationTypeAliases = {{
    {"on_top_of", "on"},        {"resting_on", "on"},       {"in_contact", "contact"},
    {"touching", "contact"},    {"beneath", "below"},       {"underneath", "under"},
    {"attached_to", "attached"}, {"connected_to", "attached"}, {"within", "inside"},
    {"in", "inside"},           {"contain", "contains"},    {"aligned_with", "aligned"},
    {"apart", "separated"},     {"not_touching", "separated"}, {"left", "left_of"},
}};

template <std::size_t N>
void rename_keys(Json& obj, const std::array<KeyAlias, N>& aliases) {
  if (!obj.is_object()) return;
  for (const auto& a : aliases) {
    const std::string from(a.from);
    const std::string to(a.to);
    if (obj.contains(from) && !obj.contains(to)) {
      obj[to] = obj[from];
      obj.erase(from);
    }
  }
}

std::string normalize_token(std::string s) {
  std::string out;
  for (unsigned char c : s) {
    if (c == ' ' || c == '-') out.push_back('_');
    else out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && out.front() == '_') out.erase(out.begin());
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

// "4.9", " 4.9 m/s^2" -> 4.9; anything without a leading number is left alone.
std::optional<double> leading_number(const std::string& s) {
  const char* begin = s.c_str();
  while (*begin == ' ') ++begin;
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) return std::nullopt;
  return v;
}

void canonicalize_unit_field(Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return;
  if (auto token = canonical_unit(it->get<std::string>())) *it = *token;
}

Json canonical_number_map(const Json& in) {
  if (!in.is_object()) return in;
  Json out = Json::object();
  for (auto it = in.begin(); it != in.end(); ++it) {
    const Json& v = *it;
    if (v.is_string()) {
      if (auto n = leading_number(v.get<std::string>())) {
        out[it.key()] = *n;
        continue;
      }
    } else if (v.is_object() && v.contains("value") && v["value"].is_number()) {
      out[it.key()] = v["value"];
      continue;
    }
    out[it.key()] = v;
  }
  return out;
}

void canonicalize_answer(Json& ans) {
  if (ans.is_null()) return;
  if (!ans.is_object()) {
    ans = Json{{"value", ans}};
  }
  rename_keys(ans, std::array<KeyAlias, 3>{{{"answer", "value"}, {"final", "value"}, {"units", "unit"}}});
  canonicalize_unit_field(ans, "unit");
}

void canonicalize_state0(Json& s) {
  if (!s.is_object()) return;
  rename_keys(s, kState0Aliases);
  if (auto it = s.find("assumptions"); it != s.end() && it->is_string())
    *it = Json::array({it->get<std::string>()});
  if (auto it = s.find("objects"); it != s.end() && it->is_array()) {
    for (auto& o : *it) {
      if (o.is_string()) {
        o = Json{{"name", o.get<std::string>()}, {"attributes", Json::object()}};
        continue;
      }
      if (!o.is_object()) continue;
      if (!o.contains("name")) {
        for (const char* k : {"label", "id", "object"}) {
          if (o.contains(k) && o[k].is_string()) {
            o["name"] = o[k];
            o.erase(k);
            break;
          }
        }
      }
      Json attrs = o.contains("attributes") && o["attributes"].is_object() ? o["attributes"]
                                                                            : Json::object();
      std::vector<std::string> moved;
      for (auto kv = o.begin(); kv != o.end(); ++kv) {
        if (kv.key() == "name" || kv.key() == "attributes") continue;
        if (!attrs.contains(kv.key())) attrs[kv.key()] = kv.value();
        moved.push_back(kv.key());
      }
      for (const auto& k : moved) o.erase(k);
      o["attributes"] = attrs;
    }
  }
  if (auto it = s.find("relations"); it != s.end() && it->is_array()) {
    for (auto& r : *it) {
      if (!r.is_object()) continue;
      rename_keys(r, kRelationAliases);
      if (!r.contains("args") && r.contains("subject") && r.contains("object")) {
        r["args"] = Json::array({r["subject"], r["object"]});
        r.erase("subject");
        r.erase("object");
      }
      if (auto t = r.find("type"); t != r.end() && t->is_string()) {
        std::string norm = normalize_token(t->get<std::string>());
        for (const auto& a : kRelationTypeAliases)
          if (norm == a.from) norm = std::string(a.to);
        *t = norm;
      }
    }
  }
  if (auto it = s.find("forces"); it != s.end() && it->is_array()) {
    for (auto& f : *it) {
      if (!f.is_object()) continue;
      rename_keys(f, kForceAliases);
      if (!f.contains("name") && f.contains("type")) {
        f["name"] = f["type"];
        f.erase("type");
      }
      if (auto m = f.find("magnitude"); m != f.end() && m->is_string()) {
        if (auto n = leading_number(m->get<std::string>())) *m = *n;
      }
      canonicalize_unit_field(f, "unit");
    }
  }
  if (auto it = s.find("variables"); it != s.end()) *it = canonical_number_map(*it);
}

void canonicalize_transition(Json& t) {
  if (!t.is_object()) return;
  rename_keys(t, kTransitionAliases);
  if (!t.contains("effect") && t.contains("change")) {
    t["effect"] = t["change"];
    t.erase("change");
  }
  if (auto it = t.find("equation"); it != t.end() && it->is_array()) {
    std::string joined;
    for (const auto& e : *it) {
      if (!e.is_string()) continue;
      if (!joined.empty()) joined += "; ";
      joined += e.get<std::string>();
    }
    *it = joined;
  }
  if (auto it = t.find("evidence"); it != t.end() && it->is_string())
    *it = Json::array({it->get<std::string>()});
}

void canonicalize_state1(Json& s) {
  if (!s.is_object()) return;
  rename_keys(s, kState1Aliases);
  if (auto it = s.find("new_variables"); it != s.end()) *it = canonical_number_map(*it);
}

}  // namespace

std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::no_object_found: return "no-object-found";
    case ParseErrorKind::malformed: return "malformed";
    case ParseErrorKind::truncated: return "truncated";
  }
  return "malformed";
}

Json extract_json_object(std::string_view text) {
  std::optional<ParseErrorKind> first_failure;
  std::size_t failure_offset = text.size();
  std::string failure_detail;

  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{' || c == '[') ++depth;
      else if (c == '}' || c == ']') {
        if (--depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string_view::npos) {
      if (!first_failure) {
        first_failure = ParseErrorKind::truncated;
        failure_offset = text.size();
        failure_detail = "object starting at offset " + std::to_string(start) + " is never closed";
      }
      continue;
    }
    Json doc = Json::parse(text.substr(start, end - start + 1), nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) return doc;
    if (!first_failure) {
      first_failure = ParseErrorKind::malformed;
      failure_offset = start;
      failure_detail = "balanced span at offset " + std::to_string(start) + " is not valid JSON";
    }
  }
  if (!first_failure)
    throw ParseError(ParseErrorKind::no_object_found, text.size(), "no JSON object in text");
  throw ParseError(*first_failure, failure_offset, failure_detail);
}

Json canonicalize(const Json& in) {
  Json doc = in;
  if (!doc.is_object()) return doc;
  rename_keys(doc, kTopLevelAliases);
  if (auto it = doc.find("state_0"); it != doc.end()) canonicalize_state0(*it);
  if (auto it = doc.find("transition"); it != doc.end()) canonicalize_transition(*it);
  if (auto it = doc.find("state_1"); it != doc.end()) canonicalize_state1(*it);
  if (auto it = doc.find("answer"); it != doc.end()) canonicalize_answer(*it);
  if (auto it = doc.find("metadata"); it != doc.end() && it->is_object()) {
    if (auto g = it->find("gold_answer"); g != it->end()) canonicalize_answer(*g);
    if (auto g = it->find("gold_variables"); g != it->end()) *g = canonical_number_map(*g);
  }
  if (auto it = doc.find("scenario_family"); it != doc.end() && it->is_string())
    *it = normalize_token(it->get<std::string>());
  return doc;
}

Trace parse_trace(std::string_view text) {
  return trace_from_json(canonicalize(extract_json_object(text)));
}

Answer parse_answer_reply(std::string_view text) {
  Json doc = canonicalize(extract_json_object(text));
  if (auto it = doc.find("answer"); it != doc.end() && !it->is_null()) return answer_from_json(*it);
  if (doc.contains("value")) {
    Json a = doc;
    canonicalize_answer(a);
    return answer_from_json(a);
  }
  throw ParseError(ParseErrorKind::malformed, 0, "reply has no answer field");
}

}  // namespace wmw
