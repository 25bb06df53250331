#include "wmw/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "wmw/answer.hpp"
#include "wmw/families.hpp"
#include "wmw/schema.hpp"
#include "wmw/tables.hpp"
#include "wmw/units.hpp"

namespace wmw {

namespace {

constexpr auto kPositive = std::to_array<std::string_view>(
    {"right", "rightward", "upward", "forward", "increases", "accelerates"});
constexpr auto kNegative = std::to_array<std::string_view>(
    {"left", "leftward", "downward", "backward", "decreases", "decelerates"});

std::string num(double v) { return Json(v).dump(); }

// Lower-case, articles dropped, separators folded to '_'.
std::string entity_key(std::string_view name) {
  std::string out;
  for (const auto& tok : tokenize(name)) {
    if (tok == "the" || tok == "a" || tok == "an") continue;
    if (!out.empty()) out.push_back('_');
    out += tok;
  }
  return out;
}

// "ground", or any name with a generic token such as "inclined_surface".
bool is_generic(const std::string& key) {
  std::string spaced = key;
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  for (auto g : generic_entities())
    if (contains_phrase(spaced, g)) return true;
  return false;
}

bool has_token(std::string_view text, std::string_view token) {
  const auto toks = tokenize(text);
  return std::find(toks.begin(), toks.end(), token) != toks.end();
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

// Ratio a/b is a power of ten or a known unit-confusion factor.
bool looks_like_unit_slip(double value, double reference) {
  if (reference == 0.0 || value == 0.0) return false;
  const double r = std::abs(value / reference);
  const double lg = std::log10(r);
  const double k = std::round(lg);
  if (k != 0.0 && std::abs(r / std::pow(10.0, k) - 1.0) <= kRelativeTolerance) return true;
  for (double f : confusion_scale_factors())
    if (std::abs(r / f - 1.0) <= kRelativeTolerance) return true;
  return false;
}

std::string relation_key(const Relation& r) {
  std::string k = lower(r.type) + "(";
  for (std::size_t i = 0; i < r.args.size(); ++i) {
    if (i) k += ",";
    k += entity_key(r.args[i]);
  }
  return k + ")";
}

bool balanced_parentheses(std::string_view eq) {
  int depth = 0;
  for (char c : eq) {
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) return false;
  }
  return depth == 0;
}

const Metadata* own_metadata(const Trace& t) { return t.metadata ? &*t.metadata : nullptr; }

}  // namespace

VerifierConfig::VerifierConfig() : rule_keywords(default_rule_keywords()) {}

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::high: return "high";
    case Confidence::medium: return "medium";
    case Confidence::low: return "low";
  }
  return "low";
}

std::optional<Confidence> confidence_from_string(std::string_view s) {
  const std::string l = lower(s);
  if (l == "high") return Confidence::high;
  if (l == "medium") return Confidence::medium;
  if (l == "low") return Confidence::low;
  return std::nullopt;
}

Json to_json(const VerifierReport& r) {
  Json labels = Json::array();
  for (Label l : r.labels) labels.push_back(to_string(l));
  return Json{{"z_schema", to_string(r.z_schema)}, {"z_state", to_string(r.z_state)},
              {"z_trans", to_string(r.z_trans)},   {"z_ans", to_string(r.z_ans)},
              {"z_faith", to_string(r.z_faith)},   {"labels", labels},
              {"messages", r.messages},            {"abstain_reasons", r.abstain_reasons}};
}

VerifierReport report_from_json(const Json& j) {
  VerifierReport r;
  auto verdict = [&](const char* key) {
    if (j.contains(key) && j[key].is_string())
      if (auto v = verdict_from_string(j[key].get<std::string>())) return *v;
    return Verdict::abstain;
  };
  r.z_schema = verdict("z_schema");
  r.z_state = verdict("z_state");
  r.z_trans = verdict("z_trans");
  r.z_ans = verdict("z_ans");
  r.z_faith = verdict("z_faith");
  if (j.contains("labels"))
    for (const auto& l : j["labels"])
      if (l.is_string())
        if (auto lab = label_from_string(l.get<std::string>())) r.labels.insert(*lab);
  if (j.contains("messages")) r.messages = j["messages"].get<std::vector<std::string>>();
  if (j.contains("abstain_reasons")) r.abstain_reasons = j["abstain_reasons"].get<std::vector<std::string>>();
  return r;
}

Json to_json(const JudgeVerdict& v) {
  Json labels = Json::array();
  for (Label l : v.labels) labels.push_back(to_string(l));
  return Json{{"labels", labels},
              {"field_errors", v.field_errors},
              {"answer_trace_consistent", v.answer_trace_consistent},
              {"confidence", to_string(v.confidence)},
              {"rationale", v.rationale}};
}

JudgeVerdict judge_verdict_from_json(const Json& j) {
  JudgeVerdict v;
  if (auto it = j.find("labels"); it != j.end() && it->is_array())
    for (const auto& l : *it)
      if (l.is_string())
        if (auto lab = label_from_string(l.get<std::string>())) v.labels.insert(*lab);
  if (auto it = j.find("field_errors"); it != j.end() && it->is_object())
    for (auto kv = it->begin(); kv != it->end(); ++kv)
      if (kv->is_string() && !kv->get<std::string>().empty()) v.field_errors[kv.key()] = kv->get<std::string>();
  if (auto it = j.find("answer_trace_consistent"); it != j.end() && it->is_boolean())
    v.answer_trace_consistent = it->get<bool>();
  // An unreadable confidence is treated as low so it cannot tighten verdicts.
  v.confidence = Confidence::low;
  if (auto it = j.find("confidence"); it != j.end() && it->is_string())
    if (auto c = confidence_from_string(it->get<std::string>())) v.confidence = *c;
  if (auto it = j.find("rationale"); it != j.end() && it->is_string()) v.rationale = it->get<std::string>();
  return v;
}

std::optional<int> extract_direction_sign(std::string_view text) {
  const auto toks = tokenize(text);
  bool pos = false, neg = false;
  for (const auto& t : toks) {
    if (std::find(kPositive.begin(), kPositive.end(), t) != kPositive.end()) pos = true;
    if (std::find(kNegative.begin(), kNegative.end(), t) != kNegative.end()) neg = true;
  }
  if (pos == neg) return std::nullopt;
  return pos ? 1 : -1;
}

CheckResult check_state(const State0& s0, const Metadata* gold) {
  CheckResult r;

  // (1) entity existence
  std::set<std::string> names;
  for (const auto& o : s0.objects) names.insert(entity_key(o.name));
  auto resolves = [&](const std::string& ref) {
    const std::string k = entity_key(ref);
    return names.contains(k) || is_generic(k);
  };
  for (const auto& f : s0.forces)
    if (!resolves(f.target))
      r.fail(Label::object, "force '" + f.name + "' targets '" + f.target + "', which is not in objects");
  for (const auto& rel : s0.relations)
    for (const auto& a : rel.args)
      if (!resolves(a))
        r.fail(Label::object, "relation " + rel.type + " refers to '" + a + "', which is not in objects");

  // (2) contradictory relations on the same ordered arguments
  for (std::size_t i = 0; i < s0.relations.size(); ++i) {
    for (std::size_t j = i + 1; j < s0.relations.size(); ++j) {
      const auto& a = s0.relations[i];
      const auto& b = s0.relations[j];
      if (a.args != b.args) continue;
      for (const auto& p : contradictory_relation_pairs()) {
        if ((a.type == p.a && b.type == p.b) || (a.type == p.b && b.type == p.a)) {
          r.fail(Label::relation, "relations " + a.type + " and " + b.type + " contradict on the same objects");
          break;
        }
      }
    }
  }

  // (3) variable bounds
  for (const auto& [key, value] : s0.variables) {
    if (!std::isfinite(value)) {
      r.fail(Label::state, "variable " + key + " is not finite");
      continue;
    }
    const BoundRule* rule = bound_rule_for(key);
    if (!rule) continue;
    const bool low_ok = rule->lo_open ? value > rule->lo : value >= rule->lo;
    if (!low_ok || value > rule->hi)
      r.fail(Label::state, "variable " + key + " = " + num(value) + " is outside the plausible range for " +
                               std::string(rule->patterns.front()));
  }

  // (4) force direction sanity
  for (const auto& f : s0.forces) {
    const std::string name = lower(f.name);
    if (name.find("gravity") != std::string::npos || name.find("weight") != std::string::npos) {
      const bool down = has_token(f.direction, "down") || has_token(f.direction, "downward") ||
                        contains_ci(f.direction, "toward the ground") || contains_ci(f.direction, "toward the earth");
      if (!down) r.fail(Label::force, "gravity on " + f.target + " points '" + f.direction + "', not downward");
    }
    if (has_token(name, "normal") && has_token(f.direction, "into"))
      r.fail(Label::force, "normal force on " + f.target + " points into the surface");
  }

  // (5) gold comparison
  const bool have_gold = gold && (gold->gold_variables || gold->gold_relations);
  if (gold && gold->gold_variables) {
    for (const auto& [key, expected] : *gold->gold_variables) {
      auto it = s0.variables.find(key);
      if (it == s0.variables.end()) {
        r.fail(Label::state, "variable " + key + " is missing from state_0");
        continue;
      }
      if (within_tolerance(it->second, expected)) continue;
      if (looks_like_unit_slip(it->second, expected))
        r.fail(Label::unit_scale, "variable " + key + " = " + num(it->second) + " is off from the gold " +
                                      num(expected) + " by a unit factor");
      else
        r.fail(Label::state, "variable " + key + " = " + num(it->second) + " disagrees with the gold " +
                                 num(expected));
    }
  }
  if (gold && gold->gold_relations) {
    std::set<std::string> present;
    for (const auto& rel : s0.relations) present.insert(relation_key(rel));
    for (const auto& g : *gold->gold_relations)
      if (!present.contains(relation_key(g)))
        r.fail(Label::relation, "gold relation " + relation_key(g) + " is missing or altered");
  }
  if (!have_gold && r.verdict == Verdict::valid) {
    r.verdict = Verdict::abstain;
    r.abstain_reasons.push_back("state: no gold variables or relations to compare against");
  }
  return r;
}

CheckResult check_transition(const Trace& trace, const VerifierConfig& config, std::string_view question) {
  CheckResult r;
  const State0& s0 = *trace.state_0;
  const Transition& tr = *trace.transition;
  const State1& s1 = *trace.state_1;

  // (1) rule keyword plausibility
  if (auto it = config.rule_keywords.find(trace.scenario_family); it != config.rule_keywords.end()) {
    const std::string rule = lower(tr.rule);
    const bool hit = std::any_of(it->second.begin(), it->second.end(),
                                 [&](const std::string& k) { return rule.find(lower(k)) != std::string::npos; });
    if (!hit) r.fail(Label::transition, "rule '" + tr.rule + "' does not fit family " + trace.scenario_family);
  }

  // (2) force and acceleration direction agree
  const auto effect_sign = extract_direction_sign(tr.effect);
  for (const auto& f : s0.forces) {
    if (!has_token(f.name, "net") && !has_token(f.name, "applied")) continue;
    const auto force_sign = extract_direction_sign(f.direction);
    if (force_sign && effect_sign && *force_sign != *effect_sign) {
      r.fail(Label::transition, f.name + " points '" + f.direction + "' but the effect says '" + tr.effect + "'");
      continue;
    }
    for (const auto& m : find_phrases(f.direction, direction_pairs())) {
      if (contains_phrase(tr.effect, m.opposite) && !contains_phrase(tr.effect, m.phrase)) {
        r.fail(Label::transition, f.name + " points '" + std::string(m.phrase) + "' but the effect moves '" +
                                      std::string(m.opposite) + "'");
        break;
      }
    }
  }

  // (3) effect and predicted change agree in sign
  const auto change_sign = extract_direction_sign(s1.predicted_change);
  if (effect_sign && change_sign && *effect_sign != *change_sign)
    r.fail(Label::intervention, "effect '" + tr.effect + "' and predicted change '" + s1.predicted_change +
                                    "' disagree in direction");

  // (4) temporal markers
  std::vector<std::string> s0_text(s0.assumptions.begin(), s0.assumptions.end());
  for (const auto& o : s0.objects) {
    s0_text.push_back(o.name);
    for (const auto& [_, v] : o.attributes)
      if (const auto* s = std::get_if<std::string>(&v)) s0_text.push_back(*s);
  }
  for (const auto& f : s0.forces) {
    s0_text.push_back(f.name);
    s0_text.push_back(f.direction);
  }
  for (const auto& [key, _] : s0.variables) s0_text.push_back(key);
  for (const auto& text : s0_text) {
    for (auto marker : post_markers()) {
      if (contains_ci(text, marker)) {
        r.fail(Label::temporal, "state_0 contains post-transition language '" + std::string(marker) + "'");
        break;
      }
    }
  }
  for (auto marker : pre_markers())
    if (contains_ci(s1.predicted_change, marker))
      r.fail(Label::temporal, "state_1 contains pre-transition language '" + std::string(marker) + "'");

  // (5) equation sanity
  if (tr.equation) {
    if (!balanced_parentheses(*tr.equation))
      r.fail(Label::transition, "equation '" + *tr.equation + "' has unbalanced parentheses");
    for (auto marker : perturbation_markers())
      if (contains_ci(*tr.equation, marker))
        r.fail(Label::transition, "equation contains the marker '" + std::string(marker) + "'");
  }

  // Under-specified examples: the question names an effect the trace never
  // commits to. A definite violation found above still wins.
  if (r.verdict == Verdict::valid) {
    const std::string q = lower(question);
    std::string assumptions;
    for (const auto& a : s0.assumptions) assumptions += lower(a) + "\n";
    struct Need {
      std::string_view cue;
      std::vector<std::string_view> accepted;
    };
    const Need needs[] = {{"friction", {"friction"}},
                          {"elastic", {"elastic"}},
                          {"air resistance", {"air resistance", "drag"}}};
    for (const auto& n : needs) {
      if (q.find(n.cue) == std::string::npos) continue;
      const bool covered = std::any_of(n.accepted.begin(), n.accepted.end(), [&](std::string_view a) {
        return assumptions.find(a) != std::string::npos;
      });
      if (!covered) {
        r.verdict = Verdict::abstain;
        r.abstain_reasons.push_back("transition: the question mentions " + std::string(n.cue) +
                                    " but no assumption addresses it");
      }
    }
  }
  return r;
}

CheckResult check_faithfulness(const Trace& trace, const Metadata* gold) {
  CheckResult r;
  auto abstain = [&](std::string reason) {
    r.verdict = Verdict::abstain;
    r.abstain_reasons.push_back("faithfulness: " + std::move(reason));
    return r;
  };
  if (!trace.answer || !trace.state_1) return abstain("no answer or state_1");

  const Metadata* meta = gold ? gold : own_metadata(trace);
  if (meta && meta->answer_type != AnswerType::numeric && meta->answer_type != AnswerType::unit_bearing)
    return abstain("answer is not numeric");

  double raw = 0.0;
  if (const double* d = std::get_if<double>(&trace.answer->value)) {
    raw = *d;
  } else {
    const std::string& s = std::get<std::string>(trace.answer->value);
    char* end = nullptr;
    raw = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return abstain("answer is not numeric");
  }
  std::optional<double> converted;
  try {
    converted = normalize_answer(*trace.answer, AnswerType::unit_bearing, meta ? meta->canonical_unit : "").value;
  } catch (const NormalizationError&) {
  }

  const auto& nv = trace.state_1->new_variables;
  const std::string key = meta ? meta->answer_key : "";
  if (!key.empty() && nv.contains(key)) {
    const double ref = nv.at(key);
    if (converted && within_tolerance(*converted, ref)) return r;
    if (within_tolerance(raw, ref)) {
      r.fail(Label::unit_scale, "answer " + num(raw) + " " + trace.answer->unit.value_or("") +
                                    " matches " + key + " only before unit conversion");
      return r;
    }
    const double v = converted.value_or(raw);
    std::string msg = "answer " + num(v) + " disagrees with state_1 " + key + " = " + num(ref);
    if (ref != 0.0) {
      const double ratio = std::abs(v / ref);
      if (ratio > 100 || ratio < 0.01) msg += " (ratio " + num(ratio) + ")";
    }
    r.fail(Label::faithfulness, msg);
    return r;
  }

  if (nv.empty()) return abstain("state_1 has no variables to compare against");
  const double v = converted.value_or(raw);
  bool all_extreme = true;
  for (const auto& [k, ref] : nv) {
    if (within_tolerance(v, ref) || within_tolerance(raw, ref)) return r;
    if (ref == 0.0) {
      all_extreme = false;
      continue;
    }
    const double ratio = std::abs(v / ref);
    if (ratio <= 100 && ratio >= 0.01) all_extreme = false;
  }
  if (all_extreme) {
    r.fail(Label::faithfulness, "answer " + num(v) + " is more than 100x away from every state_1 variable");
    return r;
  }
  return abstain("the requested quantity is not among state_1 variables");
}

VerifierReport verify(const Trace& trace, const Metadata* gold, const VerifierConfig& config) {
  VerifierReport rep;
  const SchemaReport schema = validate_schema(trace, config.strict_schema);
  if (!schema.valid) {
    rep.z_schema = Verdict::invalid;
    for (const auto& e : schema.errors) rep.messages.push_back("schema: " + e.path + ": " + e.message);
    rep.z_state = rep.z_trans = rep.z_ans = rep.z_faith = Verdict::abstain;
    rep.abstain_reasons.push_back("schema invalid: deeper checks skipped");
    return rep;
  }

  auto merge = [&rep](const CheckResult& c) {
    rep.labels.insert(c.labels.begin(), c.labels.end());
    rep.messages.insert(rep.messages.end(), c.messages.begin(), c.messages.end());
    rep.abstain_reasons.insert(rep.abstain_reasons.end(), c.abstain_reasons.begin(), c.abstain_reasons.end());
    return c.verdict;
  };

  const Metadata* meta = gold ? gold : own_metadata(trace);
  rep.z_state = merge(check_state(*trace.state_0, gold));
  rep.z_trans = merge(check_transition(trace, config, meta ? std::string_view(meta->question) : ""));
  rep.z_faith = merge(check_faithfulness(trace, gold));

  // Answer normalization on its own.
  if (!trace.answer) {
    rep.z_ans = Verdict::abstain;
    rep.abstain_reasons.push_back("answer: missing");
  } else {
    try {
      normalize_answer(*trace.answer, meta ? meta->answer_type : AnswerType::unit_bearing,
                       meta ? meta->canonical_unit : "");
    } catch (const NormalizationError& e) {
      rep.z_ans = Verdict::invalid;
      if (e.kind() == NormalizationErrorKind::unknown_unit) rep.labels.insert(Label::unit_scale);
      rep.messages.push_back(std::string("answer: ") + e.what());
    }
  }
  return rep;
}

VerifierReport ensemble(const VerifierReport& rule, const std::optional<JudgeVerdict>& judge) {
  if (!judge || judge->confidence == Confidence::low) return rule;
  VerifierReport out = rule;
  out.labels.insert(judge->labels.begin(), judge->labels.end());
  if (!judge->rationale.empty()) out.messages.push_back("judge: " + judge->rationale);
  // Deeper fields stay abstained when the schema already failed.
  if (out.z_schema == Verdict::invalid) return out;

  auto flag = [](Verdict& v) { v = Verdict::invalid; };
  for (Label l : judge->labels) {
    switch (l) {
      case Label::object:
      case Label::state:
      case Label::relation:
      case Label::force: flag(out.z_state); break;
      case Label::transition:
      case Label::intervention:
      case Label::temporal: flag(out.z_trans); break;
      case Label::unit_scale:
      case Label::faithfulness: flag(out.z_faith); break;
    }
  }
  for (const auto& [field, message] : judge->field_errors) {
    out.messages.push_back("judge " + field + ": " + message);
    if (field == "state_0") flag(out.z_state);
    else if (field == "transition" || field == "state_1") flag(out.z_trans);
    else if (field == "answer") flag(out.z_faith);
  }
  if (!judge->answer_trace_consistent) flag(out.z_faith);
  return out;
}

std::vector<VerifierReport> verify_batch_serial(std::span<const Trace> traces, bool use_trace_metadata_as_gold,
                                                const VerifierConfig& config) {
  std::vector<VerifierReport> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(verify(t, use_trace_metadata_as_gold ? own_metadata(t) : nullptr, config));
  return out;
}

std::vector<VerifierReport> verify_batch(std::span<const Trace> traces, bool use_trace_metadata_as_gold,
                                         const VerifierConfig& config) {
  std::vector<VerifierReport> out(traces.size());
  const auto n = static_cast<std::ptrdiff_t>(traces.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Trace& t = traces[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = verify(t, use_trace_metadata_as_gold ? own_metadata(t) : nullptr, config);
  }
  return out;
}

}  // namespace wmw
