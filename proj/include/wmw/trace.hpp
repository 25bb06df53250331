#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wmw/vocab.hpp"

namespace wmw {

using Json = nlohmann::json;
using Scalar = std::variant<double, std::string>;
using VariableMap = std::map<std::string, double>;

struct Object {
  std::string name;
  std::map<std::string, Scalar> attributes;

  bool operator==(const Object&) const = default;
};

struct Relation {
  std::string type;
  std::vector<std::string> args;

  bool operator==(const Relation&) const = default;
};

struct Force {
  std::string name;
  std::string target;
  std::string direction;
  std::optional<double> magnitude;
  std::optional<std::string> unit;

  bool operator==(const Force&) const = default;
};

struct State0 {
  std::vector<Object> objects;
  std::vector<Relation> relations;
  std::vector<Force> forces;
  VariableMap variables;
  std::vector<std::string> assumptions;

  bool operator==(const State0&) const = default;
};

struct Transition {
  std::string rule;
  std::string effect;
  std::optional<std::string> equation;
  std::vector<std::string> evidence;

  bool operator==(const Transition&) const = default;
};

struct State1 {
  std::string predicted_change;
  VariableMap new_variables;

  bool operator==(const State1&) const = default;
};

struct Answer {
  Scalar value;
  std::optional<std::string> unit;
  std::optional<std::string> explanation;

  bool operator==(const Answer&) const = default;
};

/// Example-level bookkeeping. Everything the verifier treats as gold lives
/// here, plus the question and scene descriptor the runner renders.
struct Metadata {
  std::optional<Answer> gold_answer;
  std::optional<VariableMap> gold_variables;
  std::optional<std::vector<Relation>> gold_relations;
  std::vector<std::string> parameter_keys;
  std::optional<Split> split;
  std::string source = "synthetic";

  std::string question;
  std::vector<std::string> options;
  AnswerType answer_type = AnswerType::unit_bearing;
  std::string answer_key;
  std::string canonical_unit;
  std::string scene_description;
  Json diagram = Json::object();

  bool operator==(const Metadata&) const = default;
};

/// One typed trace. Sections are optional because model output may omit them;
/// `document` keeps the canonicalized source JSON when the trace was parsed,
/// so schema validation sees ill-typed fields that the typed view drops.
struct Trace {
  std::string id;
  std::string scenario_family;
  std::optional<State0> state_0;
  std::optional<Transition> transition;
  std::optional<State1> state_1;
  std::optional<std::string> derivation;
  std::optional<Answer> answer;
  std::optional<Metadata> metadata;

  Json document;

  /// Equality over the typed fields only.
  bool same_fields(const Trace& other) const;
};

Json to_json(const Scalar& s);
Json to_json(const Relation& r);
Json to_json(const Answer& a);
Json to_json(const State0& s);
Json to_json(const Transition& t);
Json to_json(const State1& s);
Json to_json(const Metadata& m);
Json to_json(const Trace& t);

/// Lenient typed decode of a canonicalized document. Ill-typed members are
/// skipped rather than rejected; schema validation reports them.
Trace trace_from_json(const Json& doc);
Answer answer_from_json(const Json& j);
Relation relation_from_json(const Json& j);
Metadata metadata_from_json(const Json& j);

/// Compact one-line serialization (the JSONL row form).
std::string serialize(const Trace& t);

/// The model-facing trace fields only (state_0, transition, state_1,
/// derivation, answer), as emitted in completions.
Json completion_json(const Trace& t);

std::optional<double> scalar_number(const Scalar& s);
std::string scalar_text(const Scalar& s);

}  // namespace wmw
