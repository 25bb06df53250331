#include "wmw/perturb.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "wmw/answer.hpp"
#include "wmw/families.hpp"
#include "wmw/prompts.hpp"
#include "wmw/tables.hpp"
#include "wmw/units.hpp"

namespace wmw {

namespace {

constexpr auto kPhantoms = std::to_array<std::string_view>(
    {"cart2", "second_block", "hidden_mass", "rope_segment", "ball_b", "weight_3"});
constexpr auto kRenames = std::to_array<std::string_view>({"body_a", "item", "widget", "object_x", "thing_1"});

constexpr auto kPostTemplates = std::to_array<std::string_view>({
    "quantities are read post-collision",
    "objects are described after impact",
    "variables refer to the final state",
});
constexpr auto kPreTemplates = std::to_array<std::string_view>({
    "Relative to the pre-collision configuration, ",
    "Before impact, ",
    "Starting from the initial state, ",
});

std::string num(double v) { return Json(v).dump(); }

std::size_t site_index(const std::string& site) {
  const auto open = site.find('[');
  return static_cast<std::size_t>(std::stoul(site.substr(open + 1)));
}

std::string after_colon(const std::string& site) { return site.substr(site.find(':') + 1); }

std::string indexed(const char* field, std::size_t i) { return std::string(field) + "[" + std::to_string(i) + "]"; }

PerturbResult finish(Trace t, std::string description) {
  t.document = to_json(t);
  return {std::move(t), std::move(description)};
}

bool is_driving_force(const Force& f) {
  const auto toks = tokenize(f.name);
  return std::find(toks.begin(), toks.end(), "net") != toks.end() ||
         std::find(toks.begin(), toks.end(), "applied") != toks.end();
}

bool is_gravity(const Force& f) {
  const std::string n = lower(f.name);
  return n.find("gravity") != std::string::npos || n.find("weight") != std::string::npos;
}

bool is_normal(const Force& f) {
  const auto toks = tokenize(f.name);
  return std::find(toks.begin(), toks.end(), "normal") != toks.end();
}

std::set<std::string> object_names(const Trace& t) {
  std::set<std::string> s;
  for (const auto& o : t.state_0->objects) s.insert(o.name);
  return s;
}

std::string pick_absent(std::span<const std::string_view> pool, const std::set<std::string>& present, Rng& rng) {
  std::vector<std::string> free;
  for (auto p : pool)
    if (!present.contains(std::string(p))) free.emplace_back(p);
  return free[static_cast<std::size_t>(rng.below(free.size()))];
}

std::optional<double> answer_number(const Trace& t) {
  if (!t.answer) return std::nullopt;
  return scalar_number(t.answer->value);
}

bool rule_fits(const std::string& rule, const std::string& family) {
  const auto& table = default_rule_keywords();
  auto it = table.find(family);
  if (it == table.end()) return false;
  const std::string r = lower(rule);
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const std::string& k) { return r.find(k) != std::string::npos; });
}

using Sites = std::vector<std::string>;
using Apply = std::optional<PerturbResult>;

std::vector<Perturbation> build_registry() {
  std::vector<Perturbation> r;
  const auto S = Partition::seen;
  const auto H = Partition::held_out;

  // ---- force ----
  r.push_back({"reverse_force", Label::force, S, {"state_0.forces"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->forces.size(); ++i) {
                   const auto& f = t.state_0->forces[i];
                   if (is_driving_force(f) && !find_phrases(f.direction, direction_pairs()).empty())
                     s.push_back(indexed("forces", i));
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 auto& f = c.state_0->forces[site_index(site)];
                 auto rev = replace_phrases(f.direction, direction_pairs());
                 if (!rev) return std::nullopt;
                 std::string desc = "reversed " + f.name + " from '" + f.direction + "' to '" + *rev + "'";
                 f.direction = *rev;
                 return finish(std::move(c), desc);
               }});

  r.push_back({"reverse_gravity", Label::force, S, {"state_0.forces"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->forces.size(); ++i) {
                   const auto& f = t.state_0->forces[i];
                   if (is_gravity(f) && !find_phrases(f.direction, direction_pairs()).empty())
                     s.push_back(indexed("forces", i));
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 auto& f = c.state_0->forces[site_index(site)];
                 auto rev = replace_phrases(f.direction, direction_pairs());
                 if (!rev) return std::nullopt;
                 std::string desc = "gravity on " + f.target + " now points '" + *rev + "'";
                 f.direction = *rev;
                 return finish(std::move(c), desc);
               }});

  r.push_back({"rotate_normal_into_surface", Label::force, H, {"state_0.forces"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->forces.size(); ++i) {
                   const auto& f = t.state_0->forces[i];
                   if (is_normal(f) && !contains_phrase(f.direction, "into")) s.push_back(indexed("forces", i));
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 auto& f = c.state_0->forces[site_index(site)];
                 f.direction = "into the surface";
                 return finish(std::move(c), "normal force on " + f.target + " rotated into the surface");
               }});

  // ---- relation ----
  r.push_back({"swap_relation", Label::relation, S, {"state_0.relations"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->relations.size(); ++i)
                   if (relation_swap(t.state_0->relations[i].type)) s.push_back(indexed("relations", i));
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 auto& rel = c.state_0->relations[site_index(site)];
                 const std::string from = rel.type;
                 rel.type = std::string(*relation_swap(from));
                 return finish(std::move(c), "relation " + from + " replaced by " + rel.type);
               }});

  r.push_back({"add_contradictory_relation", Label::relation, S, {"state_0.relations"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->relations.size(); ++i)
                   if (contradictory_partner(t.state_0->relations[i].type)) s.push_back(indexed("relations", i));
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 const Relation base = c.state_0->relations[site_index(site)];
                 Relation added{std::string(*contradictory_partner(base.type)), base.args};
                 c.state_0->relations.push_back(added);
                 return finish(std::move(c), "added " + added.type + " alongside " + base.type + " on the same objects");
               }});

  r.push_back({"reverse_relation_args", Label::relation, H, {"state_0.relations"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->relations.size(); ++i) {
                   const auto& a = t.state_0->relations[i].args;
                   if (a.size() == 2 && a[0] != a[1]) s.push_back(indexed("relations", i));
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 auto& rel = c.state_0->relations[site_index(site)];
                 std::swap(rel.args[0], rel.args[1]);
                 return finish(std::move(c), "swapped the arguments of " + rel.type);
               }});

  // ---- object ----
  r.push_back({"rename_object", Label::object, S, {"state_0.objects"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 std::set<std::string> referenced;
                 for (const auto& f : t.state_0->forces) referenced.insert(f.target);
                 for (const auto& rel : t.state_0->relations) referenced.insert(rel.args.begin(), rel.args.end());
                 for (std::size_t i = 0; i < t.state_0->objects.size(); ++i) {
                   const std::string& n = t.state_0->objects[i].name;
                   const bool generic = std::any_of(generic_entities().begin(), generic_entities().end(),
                                                    [&](std::string_view g) { return contains_phrase(n, g); });
                   if (referenced.contains(n) && !generic) s.push_back(indexed("objects", i));
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng& rng) -> Apply {
                 Trace c = t;
                 auto& o = c.state_0->objects[site_index(site)];
                 const std::string from = o.name;
                 o.name = pick_absent(kRenames, object_names(t), rng);
                 return finish(std::move(c), "object " + from + " renamed to " + o.name);
               }});

  r.push_back({"misassign_force_target", Label::object, S, {"state_0.forces"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->forces.size(); ++i) s.push_back(indexed("forces", i));
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng& rng) -> Apply {
                 Trace c = t;
                 auto& f = c.state_0->forces[site_index(site)];
                 const std::string from = f.target;
                 f.target = pick_absent(kPhantoms, object_names(t), rng);
                 return finish(std::move(c), f.name + " now targets " + f.target + " instead of " + from);
               }});

  r.push_back({"misassign_relation_arg", Label::object, H, {"state_0.relations"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.state_0) return s;
                 for (std::size_t i = 0; i < t.state_0->relations.size(); ++i)
                   if (!t.state_0->relations[i].args.empty()) s.push_back(indexed("relations", i));
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng& rng) -> Apply {
                 Trace c = t;
                 auto& rel = c.state_0->relations[site_index(site)];
                 auto& arg = rel.args[static_cast<std::size_t>(rng.below(rel.args.size()))];
                 const std::string from = arg;
                 arg = pick_absent(kPhantoms, object_names(t), rng);
                 return finish(std::move(c), rel.type + " argument " + from + " replaced by " + arg);
               }});

  // ---- state ----
  auto variable_sites = [](const Trace& t) {
    Sites s;
    if (!t.state_0) return s;
    for (const auto& [k, v] : t.state_0->variables)
      if (v != 0.0) s.push_back("variables:" + k);
    return s;
  };

  r.push_back({"perturb_state_variable", Label::state, S, {"state_0.variables"}, variable_sites,
               [](const Trace& t, const std::string& site, Rng& rng) -> Apply {
                 Trace c = t;
                 const std::string key = after_colon(site);
                 double f = rng.uniform(1.3, 3.0);
                 if (rng.chance(0.5)) f = 1.0 / f;
                 double& v = c.state_0->variables.at(key);
                 const double from = v;
                 v = round_significant(v * f, 6);
                 return finish(std::move(c), key + " changed from " + num(from) + " to " + num(v));
               }});

  r.push_back({"drop_state_variable", Label::state, H, {"state_0.variables"}, variable_sites,
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 const std::string key = after_colon(site);
                 c.state_0->variables.erase(key);
                 return finish(std::move(c), "dropped " + key + " from state_0");
               }});

  r.push_back({"negate_state_variable", Label::state, H, {"state_0.variables"}, variable_sites,
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 const std::string key = after_colon(site);
                 double& v = c.state_0->variables.at(key);
                 v = -v;
                 return finish(std::move(c), "negated " + key);
               }});

  // ---- transition ----
  r.push_back({"inject_foreign_rule", Label::transition, S, {"transition.rule"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.transition) return s;
                 for (Family f : all_families()) {
                   if (to_string(f) == t.scenario_family) continue;
                   // A donor rule that still fits this family is not a violation.
                   if (rule_fits(canonical_rule(f), t.scenario_family)) continue;
                   s.push_back("donor:" + std::string(to_string(f)));
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 const std::string donor = after_colon(site);
                 c.transition->rule = canonical_rule(*family_from_string(donor));
                 return finish(std::move(c), "rule replaced by the " + donor + " rule '" + c.transition->rule + "'");
               }});

  r.push_back({"reverse_effect_sign", Label::transition, S, {"transition.effect"},
               [](const Trace& t) {
                 Sites s;
                 if (t.transition && replace_phrases(t.transition->effect, reversal_pairs())) s.push_back("effect");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng&) -> Apply {
                 Trace c = t;
                 auto rev = replace_phrases(c.transition->effect, reversal_pairs());
                 if (!rev) return std::nullopt;
                 c.transition->effect = *rev;
                 return finish(std::move(c), "effect reversed to '" + *rev + "'");
               }});

  r.push_back({"corrupt_equation", Label::transition, H, {"transition.equation"},
               [](const Trace& t) {
                 Sites s;
                 if (t.transition && t.transition->equation && !t.transition->equation->empty())
                   s.push_back("equation");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng&) -> Apply {
                 Trace c = t;
                 std::string& eq = *c.transition->equation;
                 if (auto close = eq.rfind(')'); close != std::string::npos) {
                   eq.erase(close, 1);
                 } else if (auto eqpos = eq.find("= "); eqpos != std::string::npos) {
                   eq.insert(eqpos + 2, "(");
                 } else {
                   eq.insert(0, "(");
                 }
                 return finish(std::move(c), "equation corrupted to '" + eq + "'");
               }});

  // ---- intervention ----
  r.push_back({"flip_predicted_change", Label::intervention, S, {"state_1.predicted_change"},
               [](const Trace& t) {
                 Sites s;
                 if (t.state_1 && replace_phrases(t.state_1->predicted_change, sign_word_pairs()))
                   s.push_back("predicted_change");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng&) -> Apply {
                 Trace c = t;
                 auto rev = replace_phrases(c.state_1->predicted_change, sign_word_pairs());
                 if (!rev) return std::nullopt;
                 c.state_1->predicted_change = *rev;
                 return finish(std::move(c), "predicted change flipped to '" + *rev + "'");
               }});

  r.push_back({"reverse_dynamics", Label::intervention, H, {"transition.effect", "state_1.predicted_change"},
               [](const Trace& t) {
                 Sites s;
                 if (t.transition && t.state_1 && replace_phrases(t.transition->effect, reversal_pairs()) &&
                     replace_phrases(t.state_1->predicted_change, reversal_pairs()))
                   s.push_back("dynamics");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng&) -> Apply {
                 Trace c = t;
                 c.transition->effect = *replace_phrases(c.transition->effect, reversal_pairs());
                 c.state_1->predicted_change = *replace_phrases(c.state_1->predicted_change, reversal_pairs());
                 return finish(std::move(c), "effect and predicted change both describe the reversed outcome");
               }});

  // ---- temporal ----
  r.push_back({"swap_temporal", Label::temporal, S,
               {"state_0.variables", "state_0.assumptions", "state_1.new_variables"},
               [](const Trace& t) {
                 Sites s;
                 if (t.state_0 && t.state_1 && !t.state_0->variables.empty() && !t.state_1->new_variables.empty() &&
                     t.state_0->variables != t.state_1->new_variables)
                   s.push_back("states");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng&) -> Apply {
                 Trace c = t;
                 std::swap(c.state_0->variables, c.state_1->new_variables);
                 c.state_0->assumptions.push_back("values describe the final state");
                 return finish(std::move(c), "state_0 and state_1 variables swapped, final-state marker added");
               }});

  r.push_back({"inject_post_marker", Label::temporal, S, {"state_0.assumptions"},
               [](const Trace& t) {
                 Sites s;
                 if (t.state_0) s.push_back("assumptions");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng& rng) -> Apply {
                 Trace c = t;
                 const std::string text(kPostTemplates[static_cast<std::size_t>(rng.below(kPostTemplates.size()))]);
                 c.state_0->assumptions.push_back(text);
                 return finish(std::move(c), "added post-transition assumption '" + text + "'");
               }});

  r.push_back({"inject_pre_marker_s1", Label::temporal, H, {"state_1.predicted_change"},
               [](const Trace& t) {
                 Sites s;
                 if (t.state_1) s.push_back("predicted_change");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng& rng) -> Apply {
                 Trace c = t;
                 const std::string prefix(kPreTemplates[static_cast<std::size_t>(rng.below(kPreTemplates.size()))]);
                 c.state_1->predicted_change = prefix + c.state_1->predicted_change;
                 return finish(std::move(c), "state_1 now opens with pre-transition language");
               }});

  // ---- unit/scale ----
  r.push_back({"corrupt_answer_unit", Label::unit_scale, S, {"answer.unit"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.answer || !t.answer->unit) return s;
                 for (const auto& alt : confusable_units(*t.answer->unit))
                   if (convert(1.0, *t.answer->unit, alt)) s.push_back("unit:" + alt);
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 const std::string from = *c.answer->unit;
                 c.answer->unit = after_colon(site);
                 return finish(std::move(c), "answer unit " + from + " replaced by " + *c.answer->unit);
               }});

  r.push_back({"scale_variable_unit", Label::unit_scale, H, {"state_0.variables"}, variable_sites,
               [](const Trace& t, const std::string& site, Rng& rng) -> Apply {
                 static constexpr std::array<double, 4> kFactors{100.0, 1000.0, 0.01, 0.001};
                 Trace c = t;
                 const std::string key = after_colon(site);
                 const double f = kFactors[static_cast<std::size_t>(rng.below(kFactors.size()))];
                 double& v = c.state_0->variables.at(key);
                 v = round_significant(v * f, 6);
                 return finish(std::move(c), key + " rescaled by " + num(f) + " as if written in the wrong unit");
               }});

  // ---- faithfulness ----
  r.push_back({"scale_answer", Label::faithfulness, S, {"answer.value"},
               [](const Trace& t) {
                 Sites s;
                 if (auto v = answer_number(t); v && *v != 0.0) s.push_back("value");
                 return s;
               },
               [](const Trace& t, const std::string&, Rng& rng) -> Apply {
                 Trace c = t;
                 const double f = rng.uniform(3.0, 50.0);
                 const double v = round_significant(*answer_number(t) * f, 6);
                 c.answer->value = v;
                 return finish(std::move(c), "answer scaled by " + num(round_significant(f, 4)) + " to " + num(v));
               }});

  r.push_back({"flip_choice", Label::faithfulness, S, {"answer.value"},
               [](const Trace& t) {
                 Sites s;
                 if (!t.metadata || t.metadata->answer_type != AnswerType::multiple_choice || !t.answer) return s;
                 const std::string cur = scalar_text(t.answer->value);
                 for (std::size_t i = 0; i < t.metadata->options.size(); ++i) {
                   const std::string letter(1, static_cast<char>('A' + i));
                   if (letter != cur) s.push_back("choice:" + letter);
                 }
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 c.answer->value = after_colon(site);
                 return finish(std::move(c), "answer choice changed to " + after_colon(site));
               }});

  r.push_back({"answer_from_input", Label::faithfulness, H, {"answer.value"},
               [](const Trace& t) {
                 Sites s;
                 const auto a = answer_number(t);
                 if (!a || !t.state_0) return s;
                 for (const auto& [k, v] : t.state_0->variables)
                   if (!within_tolerance(v, *a) && !within_tolerance(*a, v)) s.push_back("variables:" + k);
                 return s;
               },
               [](const Trace& t, const std::string& site, Rng&) -> Apply {
                 Trace c = t;
                 const std::string key = after_colon(site);
                 c.answer->value = t.state_0->variables.at(key);
                 return finish(std::move(c), "answer copied from the input " + key);
               }});

  return r;
}

const std::vector<Perturbation>& registry() {
  static const std::vector<Perturbation> r = build_registry();
  return r;
}

std::string pair_id(const std::string& trace_id, int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-p%02d", k);
  return trace_id + buf;
}

}  // namespace

std::string_view to_string(Partition p) { return p == Partition::seen ? "seen" : "held_out"; }

std::optional<Partition> partition_from_string(std::string_view s) {
  if (s == "seen") return Partition::seen;
  if (s == "held_out") return Partition::held_out;
  return std::nullopt;
}

std::span<const Perturbation> perturbation_registry() { return registry(); }

const Perturbation* find_perturbation(std::string_view name) {
  for (const auto& p : registry())
    if (p.name == name) return &p;
  return nullptr;
}

std::optional<PerturbResult> apply_perturbation(const Trace& trace, const Perturbation& p, Rng& rng) {
  const auto sites = p.sites(trace);
  if (sites.empty()) return std::nullopt;
  const std::string& site = sites[static_cast<std::size_t>(rng.below(sites.size()))];
  auto out = p.apply_at(trace, site, rng);
  if (!out || out->trace.same_fields(trace)) return std::nullopt;
  return out;
}

std::set<Label> accepted_detection_labels(Label label) {
  switch (label) {
    case Label::force: return {Label::force, Label::transition};
    case Label::transition:
    case Label::intervention: return {Label::transition, Label::intervention};
    default: return {label};
  }
}

Json to_json(const PreferencePair& p) {
  return Json{{"pair_id", p.pair_id},
              {"source_trace_id", p.source_trace_id},
              {"label", to_string(p.label)},
              {"perturbation_name", p.perturbation_name},
              {"perturbation_family", to_string(p.perturbation_family)},
              {"site", p.site},
              {"description", p.description},
              {"split", to_string(p.split)},
              {"chosen", to_json(p.chosen)},
              {"rejected", to_json(p.rejected)}};
}

PreferencePair pair_from_json(const Json& j) {
  PreferencePair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.source_trace_id = j.at("source_trace_id").get<std::string>();
  p.label = label_from_string(j.at("label").get<std::string>()).value();
  p.perturbation_name = j.at("perturbation_name").get<std::string>();
  p.perturbation_family = partition_from_string(j.at("perturbation_family").get<std::string>()).value();
  p.site = j.value("site", "");
  p.description = j.value("description", "");
  p.split = split_from_string(j.value("split", "train")).value_or(Split::train);
  p.chosen = trace_from_json(j.at("chosen"));
  p.rejected = trace_from_json(j.at("rejected"));
  return p;
}

std::vector<PreferencePair> build_pairs(std::span<const Trace> traces, int per_trace, std::uint64_t seed) {
  std::vector<PreferencePair> out;
  const auto& reg = registry();
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const Trace& t = traces[ti];
    const Split split = t.metadata && t.metadata->split ? *t.metadata->split : Split::train;
    Rng rng = Rng::substream(seed, ti);

    struct Pool {
      const Perturbation* p;
      std::vector<std::string> sites;
    };
    std::vector<Pool> pools;
    for (const auto& p : reg) {
      if (split == Split::train && p.partition == Partition::held_out) continue;
      auto sites = p.sites(t);
      if (sites.empty()) continue;
      rng.shuffle(std::span<std::string>(sites));
      pools.push_back({&p, std::move(sites)});
    }
    rng.shuffle(std::span<Pool>(pools));

    int made = 0;
    bool progressed = true;
    while (made < per_trace && progressed) {
      progressed = false;
      for (auto& pool : pools) {
        if (made >= per_trace) break;
        while (!pool.sites.empty()) {
          const std::string site = pool.sites.back();
          pool.sites.pop_back();
          auto res = pool.p->apply_at(t, site, rng);
          if (!res || res->trace.same_fields(t)) continue;
          PreferencePair pair;
          pair.pair_id = pair_id(t.id, ++made);
          pair.source_trace_id = t.id;
          pair.chosen = t;
          pair.rejected = std::move(res->trace);
          pair.label = pool.p->label;
          pair.perturbation_name = pool.p->name;
          pair.perturbation_family = pool.p->partition;
          pair.site = site;
          pair.description = std::move(res->description);
          pair.split = split;
          out.push_back(std::move(pair));
          progressed = true;
          break;
        }
      }
    }
    if (made < per_trace)
      throw InsufficientPerturbations("trace " + t.id + " supports only " + std::to_string(made) +
                                      " perturbations, " + std::to_string(per_trace) + " requested");
  }
  return out;
}

void attach_pairs(SplitsDocument& doc, std::span<const PreferencePair> pairs) {
  for (Split s : {Split::train, Split::val, Split::test}) doc.pair_ids[s].clear();
  for (const auto& p : pairs) doc.pair_ids[p.split].push_back(p.pair_id);
}

std::vector<Json> export_dpo(std::span<const PreferencePair> pairs, Split split) {
  std::vector<Json> out;
  for (const auto& p : pairs) {
    if (p.split != split) continue;
    if (split == Split::train && p.perturbation_family == Partition::held_out) continue;
    out.push_back(Json{{"pair_id", p.pair_id},
                       {"prompt", to_json(build_prompt(p.chosen, Condition::full_trace))},
                       {"chosen", completion_json(p.chosen).dump()},
                       {"rejected", completion_json(p.rejected).dump()},
                       {"label", to_string(p.label)},
                       {"perturbation_family", to_string(p.perturbation_family)}});
  }
  return out;
}

}  // namespace wmw
