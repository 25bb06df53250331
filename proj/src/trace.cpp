#include "wmw/trace.hpp"

#include <cstdlib>

namespace wmw {

namespace {

std::string str_or(const Json& j, const char* key, std::string fallback = {}) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return fallback;
  return it->get<std::string>();
}

std::optional<std::string> opt_str(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<double> opt_num(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nullopt;
  return it->get<double>();
}

std::vector<std::string> str_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) return out;
  for (const auto& e : *it)
    if (e.is_string()) out.push_back(e.get<std::string>());
  return out;
}

VariableMap var_map(const Json& j) {
  VariableMap out;
  if (!j.is_object()) return out;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it->is_number()) out[it.key()] = it->get<double>();
  return out;
}

Json var_json(const VariableMap& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

std::optional<Scalar> scalar_from(const Json& j) {
  if (j.is_number()) return Scalar{j.get<double>()};
  if (j.is_string()) return Scalar{j.get<std::string>()};
  if (j.is_boolean()) return Scalar{std::string(j.get<bool>() ? "true" : "false")};
  return std::nullopt;
}

State0 state0_from(const Json& j) {
  State0 s;
  if (auto it = j.find("objects"); it != j.end() && it->is_array()) {
    for (const auto& o : *it) {
      if (!o.is_object()) continue;
      Object obj;
      obj.name = str_or(o, "name");
      if (auto a = o.find("attributes"); a != o.end() && a->is_object()) {
        for (auto kv = a->begin(); kv != a->end(); ++kv)
          if (auto v = scalar_from(*kv)) obj.attributes[kv.key()] = *v;
      }
      s.objects.push_back(std::move(obj));
    }
  }
  if (auto it = j.find("relations"); it != j.end() && it->is_array()) {
    for (const auto& r : *it)
      if (r.is_object()) s.relations.push_back(relation_from_json(r));
  }
  if (auto it = j.find("forces"); it != j.end() && it->is_array()) {
    for (const auto& f : *it) {
      if (!f.is_object()) continue;
      Force force;
      force.name = str_or(f, "name");
      force.target = str_or(f, "target");
      force.direction = str_or(f, "direction");
      force.magnitude = opt_num(f, "magnitude");
      force.unit = opt_str(f, "unit");
      s.forces.push_back(std::move(force));
    }
  }
  if (auto it = j.find("variables"); it != j.end()) s.variables = var_map(*it);
  s.assumptions = str_list(j, "assumptions");
  return s;
}

Transition transition_from(const Json& j) {
  Transition t;
  t.rule = str_or(j, "rule");
  t.effect = str_or(j, "effect");
  t.equation = opt_str(j, "equation");
  t.evidence = str_list(j, "evidence");
  return t;
}

State1 state1_from(const Json& j) {
  State1 s;
  s.predicted_change = str_or(j, "predicted_change");
  if (auto it = j.find("new_variables"); it != j.end()) s.new_variables = var_map(*it);
  return s;
}

}  // namespace

std::optional<double> scalar_number(const Scalar& s) {
  if (const double* d = std::get_if<double>(&s)) return *d;
  const std::string& text = std::get<std::string>(s);
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  while (end != nullptr && *end == ' ') ++end;
  if (end == text.c_str() || (end != nullptr && *end != '\0')) return std::nullopt;
  return v;
}

std::string scalar_text(const Scalar& s) {
  if (const std::string* t = std::get_if<std::string>(&s)) return *t;
  return Json(std::get<double>(s)).dump();
}

Json to_json(const Scalar& s) {
  if (const double* d = std::get_if<double>(&s)) return *d;
  return std::get<std::string>(s);
}

Json to_json(const Relation& r) { return Json{{"type", r.type}, {"args", r.args}}; }

Json to_json(const Answer& a) {
  Json j{{"value", to_json(a.value)}};
  j["unit"] = a.unit ? Json(*a.unit) : Json(nullptr);
  if (a.explanation) j["explanation"] = *a.explanation;
  return j;
}

Json to_json(const State0& s) {
  Json objects = Json::array();
  for (const auto& o : s.objects) {
    Json attrs = Json::object();
    for (const auto& [k, v] : o.attributes) attrs[k] = to_json(v);
    objects.push_back(Json{{"name", o.name}, {"attributes", attrs}});
  }
  Json relations = Json::array();
  for (const auto& r : s.relations) relations.push_back(to_json(r));
  Json forces = Json::array();
  for (const auto& f : s.forces) {
    Json fj{{"name", f.name}, {"target", f.target}, {"direction", f.direction}};
    if (f.magnitude) fj["magnitude"] = *f.magnitude;
    if (f.unit) fj["unit"] = *f.unit;
    forces.push_back(std::move(fj));
  }
  return Json{{"objects", objects},
              {"relations", relations},
              {"forces", forces},
              {"variables", var_json(s.variables)},
              {"assumptions", s.assumptions}};
}

Json to_json(const Transition& t) {
  Json j{{"rule", t.rule}, {"effect", t.effect}, {"evidence", t.evidence}};
  if (t.equation) j["equation"] = *t.equation;
  return j;
}

Json to_json(const State1& s) {
  return Json{{"predicted_change", s.predicted_change}, {"new_variables", var_json(s.new_variables)}};
}

Json to_json(const Metadata& m) {
  Json j = Json::object();
  if (m.gold_answer) j["gold_answer"] = to_json(*m.gold_answer);
  if (m.gold_variables) j["gold_variables"] = var_json(*m.gold_variables);
  if (m.gold_relations) {
    Json rels = Json::array();
    for (const auto& r : *m.gold_relations) rels.push_back(to_json(r));
    j["gold_relations"] = rels;
  }
  j["parameter_keys"] = m.parameter_keys;
  if (m.split) j["split"] = std::string(to_string(*m.split));
  j["source"] = m.source;
  j["question"] = m.question;
  if (!m.options.empty()) j["options"] = m.options;
  j["answer_type"] = std::string(to_string(m.answer_type));
  if (!m.answer_key.empty()) j["answer_key"] = m.answer_key;
  if (!m.canonical_unit.empty()) j["canonical_unit"] = m.canonical_unit;
  if (!m.scene_description.empty()) j["scene_description"] = m.scene_description;
  if (!m.diagram.empty()) j["diagram"] = m.diagram;
  return j;
}

Json to_json(const Trace& t) {
  Json j = Json::object();
  j["id"] = t.id;
  j["scenario_family"] = t.scenario_family;
  if (t.state_0) j["state_0"] = to_json(*t.state_0);
  if (t.transition) j["transition"] = to_json(*t.transition);
  if (t.state_1) j["state_1"] = to_json(*t.state_1);
  if (t.derivation) j["derivation"] = *t.derivation;
  if (t.answer) j["answer"] = to_json(*t.answer);
  if (t.metadata) j["metadata"] = to_json(*t.metadata);
  return j;
}

Relation relation_from_json(const Json& j) {
  Relation r;
  r.type = str_or(j, "type");
  r.args = str_list(j, "args");
  return r;
}

Answer answer_from_json(const Json& j) {
  Answer a;
  if (j.is_object()) {
    if (auto it = j.find("value"); it != j.end()) {
      if (auto v = scalar_from(*it)) a.value = *v;
      else a.value = std::string{};
    } else {
      a.value = std::string{};
    }
    a.unit = opt_str(j, "unit");
    a.explanation = opt_str(j, "explanation");
  } else if (auto v = scalar_from(j)) {
    a.value = *v;
  } else {
    a.value = std::string{};
  }
  return a;
}

Metadata metadata_from_json(const Json& j) {
  Metadata m;
  if (!j.is_object()) return m;
  if (auto it = j.find("gold_answer"); it != j.end() && !it->is_null())
    m.gold_answer = answer_from_json(*it);
  if (auto it = j.find("gold_variables"); it != j.end() && it->is_object())
    m.gold_variables = var_map(*it);
  if (auto it = j.find("gold_relations"); it != j.end() && it->is_array()) {
    std::vector<Relation> rels;
    for (const auto& r : *it)
      if (r.is_object()) rels.push_back(relation_from_json(r));
    m.gold_relations = std::move(rels);
  }
  m.parameter_keys = str_list(j, "parameter_keys");
  if (auto s = opt_str(j, "split")) m.split = split_from_string(*s);
  m.source = str_or(j, "source", "synthetic");
  m.question = str_or(j, "question");
  m.options = str_list(j, "options");
  if (auto t = opt_str(j, "answer_type"))
    m.answer_type = answer_type_from_string(*t).value_or(AnswerType::unit_bearing);
  m.answer_key = str_or(j, "answer_key");
  m.canonical_unit = str_or(j, "canonical_unit");
  m.scene_description = str_or(j, "scene_description");
  if (auto it = j.find("diagram"); it != j.end() && it->is_object()) m.diagram = *it;
  return m;
}

Trace trace_from_json(const Json& doc) {
  Trace t;
  if (!doc.is_object()) return t;
  t.id = str_or(doc, "id");
  t.scenario_family = str_or(doc, "scenario_family");
  if (auto it = doc.find("state_0"); it != doc.end() && it->is_object()) t.state_0 = state0_from(*it);
  if (auto it = doc.find("transition"); it != doc.end() && it->is_object())
    t.transition = transition_from(*it);
  if (auto it = doc.find("state_1"); it != doc.end() && it->is_object()) t.state_1 = state1_from(*it);
  t.derivation = opt_str(doc, "derivation");
  if (auto it = doc.find("answer"); it != doc.end() && !it->is_null()) t.answer = answer_from_json(*it);
  if (auto it = doc.find("metadata"); it != doc.end() && it->is_object())
    t.metadata = metadata_from_json(*it);
  t.document = doc;
  return t;
}

bool Trace::same_fields(const Trace& o) const {
  return id == o.id && scenario_family == o.scenario_family && state_0 == o.state_0 &&
         transition == o.transition && state_1 == o.state_1 && derivation == o.derivation &&
         answer == o.answer && metadata == o.metadata;
}

std::string serialize(const Trace& t) { return to_json(t).dump(); }

Json completion_json(const Trace& t) {
  Json j = Json::object();
  if (t.state_0) j["state_0"] = to_json(*t.state_0);
  if (t.transition) j["transition"] = to_json(*t.transition);
  if (t.state_1) j["state_1"] = to_json(*t.state_1);
  if (t.derivation) j["derivation"] = *t.derivation;
  if (t.answer) j["answer"] = to_json(*t.answer);
  return j;
}

}  // namespace wmw
