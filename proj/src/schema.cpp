#include "wmw/schema.hpp"

#include <map>

namespace wmw {

namespace {

constexpr const char* kSchemaText = R"JSON({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "$id": "trace_schema.json",
  "title": "Trace",
  "type": "object",
  "required": ["id", "scenario_family", "state_0", "transition", "state_1", "answer", "metadata"],
  "additionalProperties": false,
  "properties": {
    "id": {"type": "string", "minLength": 1},
    "scenario_family": {"enum": ["inclined_plane", "projectile", "collision", "pulley", "spring",
      "circuit", "fluid", "thermal", "free_fall", "friction", "circular_motion", "wave", "lever",
      "buoyancy", "optics", "pendulum", "em_induction"]},
    "state_0": {"$ref": "#/definitions/state_0"},
    "transition": {"$ref": "#/definitions/transition"},
    "state_1": {"$ref": "#/definitions/state_1"},
    "derivation": {"type": "string"},
    "answer": {"$ref": "#/definitions/answer"},
    "metadata": {"$ref": "#/definitions/metadata"}
  },
  "definitions": {
    "variables": {"type": "object", "additionalProperties": {"type": "number"}},
    "object": {
      "type": "object",
      "required": ["name", "attributes"],
      "additionalProperties": false,
      "properties": {
        "name": {"type": "string", "minLength": 1},
        "attributes": {"type": "object", "additionalProperties": {"type": ["number", "string"]}}
      }
    },
    "relation": {
      "type": "object",
      "required": ["type", "args"],
      "additionalProperties": false,
      "properties": {
        "type": {"enum": ["on", "under", "above", "below", "contact", "separated", "left_of",
          "right_of", "inside", "contains", "attached", "aligned", "before", "after"]},
        "args": {"type": "array", "items": {"type": "string", "minLength": 1},
                 "minItems": 2, "maxItems": 2}
      }
    },
    "force": {
      "type": "object",
      "required": ["name", "target", "direction"],
      "additionalProperties": false,
      "properties": {
        "name": {"type": "string", "minLength": 1},
        "target": {"type": "string", "minLength": 1},
        "direction": {"type": "string", "minLength": 1},
        "magnitude": {"type": "number"},
        "unit": {"type": "string"}
      }
    },
    "state_0": {
      "type": "object",
      "required": ["objects", "relations", "forces", "variables", "assumptions"],
      "additionalProperties": false,
      "properties": {
        "objects": {"type": "array", "items": {"$ref": "#/definitions/object"}},
        "relations": {"type": "array", "items": {"$ref": "#/definitions/relation"}},
        "forces": {"type": "array", "items": {"$ref": "#/definitions/force"}},
        "variables": {"$ref": "#/definitions/variables"},
        "assumptions": {"type": "array", "items": {"type": "string"}}
      }
    },
    "transition": {
      "type": "object",
      "required": ["rule", "effect", "evidence"],
      "additionalProperties": false,
      "properties": {
        "rule": {"type": "string", "minLength": 1},
        "effect": {"type": "string", "minLength": 1},
        "equation": {"type": "string"},
        "evidence": {"type": "array", "items": {"type": "string"}}
      }
    },
    "state_1": {
      "type": "object",
      "required": ["predicted_change", "new_variables"],
      "additionalProperties": false,
      "properties": {
        "predicted_change": {"type": "string", "minLength": 1},
        "new_variables": {"$ref": "#/definitions/variables"}
      }
    },
    "answer": {
      "type": "object",
      "required": ["value"],
      "additionalProperties": false,
      "properties": {
        "value": {"anyOf": [{"type": "string", "minLength": 1}, {"type": "number"}]},
        "unit": {"type": ["string", "null"]},
        "explanation": {"type": "string"}
      }
    },
    "metadata": {
      "type": "object",
      "required": ["parameter_keys", "source", "question", "answer_type"],
      "additionalProperties": false,
      "properties": {
        "gold_answer": {"$ref": "#/definitions/answer"},
        "gold_variables": {"$ref": "#/definitions/variables"},
        "gold_relations": {"type": "array", "items": {"$ref": "#/definitions/relation"}},
        "parameter_keys": {"type": "array", "items": {"type": "string", "minLength": 1},
                           "minItems": 1},
        "split": {"enum": ["train", "val", "test"]},
        "source": {"enum": ["synthetic", "external"]},
        "question": {"type": "string", "minLength": 1},
        "options": {"type": "array", "items": {"type": "string"}},
        "answer_type": {"enum": ["multiple_choice", "numeric", "symbolic", "unit_bearing"]},
        "answer_key": {"type": "string"},
        "canonical_unit": {"type": "string"},
        "scene_description": {"type": "string"},
        "diagram": {"type": "object"}
      }
    }
  }
})JSON";

std::string type_name(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

bool type_matches(const Json& v, const std::string& t) {
  const std::string actual = type_name(v);
  if (t == actual) return true;
  return t == "number" && actual == "integer";
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// A Draft-7 subset: type, enum, required, properties, additionalProperties,
// items, minItems, maxItems, minLength, anyOf and local $ref.
class Draft7Validator {
 public:
  explicit Draft7Validator(const Json& root) : root_(root) {}

  void validate(const Json& value, const Json& schema, const std::string& path, SchemaReport& out) const {
    if (auto ref = schema.find("$ref"); ref != schema.end()) {
      validate(value, resolve(ref->get<std::string>()), path, out);
      return;
    }
    if (auto t = schema.find("type"); t != schema.end()) {
      bool ok = false;
      if (t->is_string()) ok = type_matches(value, t->get<std::string>());
      else
        for (const auto& alt : *t) ok = ok || type_matches(value, alt.get<std::string>());
      if (!ok) {
        out.add(path, "expected type " + t->dump() + ", got " + type_name(value));
        return;
      }
    }
    if (auto e = schema.find("enum"); e != schema.end()) {
      if (std::find(e->begin(), e->end(), value) == e->end()) {
        out.add(path, "value " + value.dump() + " not in allowed vocabulary");
        return;
      }
    }
    if (auto any = schema.find("anyOf"); any != schema.end()) {
      bool ok = false;
      for (const auto& alt : *any) {
        SchemaReport probe;
        validate(value, alt, path, probe);
        ok = ok || probe.valid;
      }
      if (!ok) out.add(path, "value matches none of the allowed forms");
    }
    if (value.is_string()) {
      if (auto m = schema.find("minLength"); m != schema.end() &&
                                              value.get<std::string>().size() < m->get<std::size_t>())
        out.add(path, "string shorter than " + m->dump());
    }
    if (value.is_array()) {
      if (auto m = schema.find("minItems"); m != schema.end() && value.size() < m->get<std::size_t>())
        out.add(path, "fewer than " + m->dump() + " items");
      if (auto m = schema.find("maxItems"); m != schema.end() && value.size() > m->get<std::size_t>())
        out.add(path, "more than " + m->dump() + " items");
      if (auto items = schema.find("items"); items != schema.end()) {
        for (std::size_t i = 0; i < value.size(); ++i)
          validate(value[i], *items, path + "[" + std::to_string(i) + "]", out);
      }
    }
    if (value.is_object()) validate_object(value, schema, path, out);
  }

 private:
  void validate_object(const Json& value, const Json& schema, const std::string& path,
                       SchemaReport& out) const {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& key : *req)
        if (!value.contains(key.get<std::string>()))
          out.add(join(path, key.get<std::string>()), "required field missing");
    }
    const Json* props = nullptr;
    if (auto p = schema.find("properties"); p != schema.end()) props = &*p;
    const auto additional = schema.find("additionalProperties");
    for (auto it = value.begin(); it != value.end(); ++it) {
      const std::string child = join(path, it.key());
      if (props != nullptr && props->contains(it.key())) {
        validate(*it, (*props)[it.key()], child, out);
      } else if (additional != schema.end()) {
        if (additional->is_boolean()) {
          if (!additional->get<bool>()) out.add(child, "unexpected field");
        } else {
          validate(*it, *additional, child, out);
        }
      }
    }
  }

  const Json& resolve(const std::string& ref) const {
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
    return root_.at("definitions").at(ref.substr(prefix.size()));
  }

  const Json& root_;
};

bool nonempty_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && it->is_string() && !it->get<std::string>().empty();
}

void require_nonempty(const Json& obj, const std::string& base, const char* key, SchemaReport& out) {
  if (!obj.contains(key)) out.add(join(base, key), "required field missing");
  else if (!nonempty_string(obj, key)) out.add(join(base, key), "must be a non-empty string");
}

void lenient_checks(const Json& doc, SchemaReport& out) {
  if (!doc.is_object()) {
    out.add("", "trace must be a JSON object");
    return;
  }
  for (const char* key :
       {"id", "scenario_family", "state_0", "transition", "state_1", "answer", "metadata"}) {
    if (!doc.contains(key)) out.add(key, "required field missing");
  }
  if (doc.contains("id")) require_nonempty(doc, "", "id", out);
  if (auto it = doc.find("scenario_family"); it != doc.end()) {
    if (!it->is_string() || !family_from_string(it->get<std::string>()))
      out.add("scenario_family", "value " + it->dump() + " not in allowed vocabulary");
  }
  if (auto it = doc.find("state_0"); it != doc.end()) {
    const Json& s = *it;
    if (!s.is_object()) {
      out.add("state_0", "must be an object");
    } else {
      for (const char* key : {"objects", "relations", "forces"}) {
        if (!s.contains(key)) out.add(join("state_0", key), "required field missing");
        else if (!s[key].is_array()) out.add(join("state_0", key), "must be an array");
      }
      if (!s.contains("variables")) out.add("state_0.variables", "required field missing");
      else if (!s["variables"].is_object()) out.add("state_0.variables", "must be an object");
      if (s.contains("objects") && s["objects"].is_array()) {
        for (std::size_t i = 0; i < s["objects"].size(); ++i) {
          const Json& o = s["objects"][i];
          const std::string p = "state_0.objects[" + std::to_string(i) + "]";
          if (!o.is_object()) out.add(p, "must be an object");
          else require_nonempty(o, p, "name", out);
        }
      }
      if (s.contains("relations") && s["relations"].is_array()) {
        for (std::size_t i = 0; i < s["relations"].size(); ++i) {
          const Json& r = s["relations"][i];
          const std::string p = "state_0.relations[" + std::to_string(i) + "]";
          if (!r.is_object()) {
            out.add(p, "must be an object");
            continue;
          }
          auto t = r.find("type");
          if (t == r.end()) out.add(p + ".type", "required field missing");
          else if (!t->is_string() || !is_relation_type(t->get<std::string>()))
            out.add(p + ".type", "value " + t->dump() + " not in allowed vocabulary");
          auto a = r.find("args");
          if (a == r.end()) out.add(p + ".args", "required field missing");
          else if (!a->is_array() || a->size() != 2) out.add(p + ".args", "must hold exactly two entities");
        }
      }
      if (s.contains("forces") && s["forces"].is_array()) {
        for (std::size_t i = 0; i < s["forces"].size(); ++i) {
          const Json& f = s["forces"][i];
          const std::string p = "state_0.forces[" + std::to_string(i) + "]";
          if (!f.is_object()) {
            out.add(p, "must be an object");
            continue;
          }
          for (const char* key : {"name", "target", "direction"}) require_nonempty(f, p, key, out);
        }
      }
    }
  }
  if (auto it = doc.find("transition"); it != doc.end()) {
    if (!it->is_object()) out.add("transition", "must be an object");
    else
      for (const char* key : {"rule", "effect"}) require_nonempty(*it, "transition", key, out);
  }
  if (auto it = doc.find("state_1"); it != doc.end()) {
    if (!it->is_object()) out.add("state_1", "must be an object");
    else require_nonempty(*it, "state_1", "predicted_change", out);
  }
  if (auto it = doc.find("answer"); it != doc.end()) {
    if (!it->is_object()) {
      out.add("answer", "must be an object");
    } else {
      auto v = it->find("value");
      if (v == it->end()) out.add("answer.value", "required field missing");
      else if (!(v->is_number() || (v->is_string() && !v->get<std::string>().empty())))
        out.add("answer.value", "must be a number or a non-empty string");
    }
  }
  if (auto it = doc.find("metadata"); it != doc.end() && !it->is_object())
    out.add("metadata", "must be an object");
}

}  // namespace

const Json& trace_schema_document() {
  static const Json schema = Json::parse(kSchemaText);
  return schema;
}

SchemaReport validate_document(const Json& doc, bool strict) {
  SchemaReport report;
  if (strict) {
    const Json& schema = trace_schema_document();
    Draft7Validator(schema).validate(doc, schema, "", report);
  } else {
    lenient_checks(doc, report);
  }
  return report;
}

SchemaReport validate_schema(const Trace& trace, bool strict) {
  if (!trace.document.is_null()) return validate_document(trace.document, strict);
  return validate_document(to_json(trace), strict);
}

std::vector<std::string> duplicate_ids(std::span<const Trace> traces) {
  std::map<std::string, int> seen;
  std::vector<std::string> dups;
  for (const auto& t : traces)
    if (++seen[t.id] == 2) dups.push_back(t.id);
  return dups;
}

}  // namespace wmw
