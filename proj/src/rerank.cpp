#include "wmw/rerank.hpp"

#include <cmath>
#include <cstdio>

#include "wmw/answer.hpp"

namespace wmw {

std::string_view to_string(RerankMode m) {
  switch (m) {
    case RerankMode::rules: return "rules";
    case RerankMode::learned: return "learned";
    case RerankMode::majority: return "majority";
  }
  return "rules";
}

std::optional<RerankMode> rerank_mode_from_string(std::string_view s) {
  if (s == "rules") return RerankMode::rules;
  if (s == "learned") return RerankMode::learned;
  if (s == "majority") return RerankMode::majority;
  return std::nullopt;
}

Json to_json(const RerankScore& s) {
  return Json{{"rule_score", s.rule_score},
              {"judge_score", s.judge_score ? Json(*s.judge_score) : Json(nullptr)},
              {"majority_bonus", s.majority_bonus},
              {"total", s.total},
              {"components", s.components}};
}

std::map<std::string, double> rule_components(const VerifierReport& r) {
  std::map<std::string, double> c;
  auto field = [&](const char* name, Verdict v, double weight) {
    c[name] = v == Verdict::valid ? weight : v == Verdict::abstain ? 0.5 : 0.0;
  };
  field("schema", r.z_schema, 1.0);
  // Fields skipped after a schema failure are not abstentions and earn nothing.
  if (r.z_schema == Verdict::invalid) {
    c["state"] = c["transition"] = c["answer_trace"] = 0.0;
    c["labels"] = -0.5 * static_cast<double>(r.labels.size());
    return c;
  }
  field("state", r.z_state, 2.0);
  field("transition", r.z_trans, 2.0);
  field("answer_trace", r.z_faith, 2.0);
  c["labels"] = -0.5 * static_cast<double>(r.labels.size());
  return c;
}

double rule_score(const VerifierReport& r) {
  double s = 0.0;
  for (const auto& [k, v] : rule_components(r)) s += v;
  return s;
}

double judge_score(const JudgeVerdict& v) {
  double s = 5.0 - 1.0 * static_cast<double>(v.labels.size());
  const bool state_or_trans = v.field_errors.contains("state_0") || v.field_errors.contains("transition") ||
                              v.field_errors.contains("state_1");
  if (state_or_trans) s -= 1.5;
  if (!v.answer_trace_consistent) s -= 2.0;
  return s;
}

std::string answer_vote_key(const std::optional<Answer>& a, AnswerType type, std::string_view canonical_unit) {
  if (!a) return {};
  try {
    const NormalizedAnswer n = normalize_answer(*a, type, canonical_unit);
    if (n.type == AnswerType::multiple_choice || n.type == AnswerType::symbolic) return n.text;
    // Three significant figures, so values within rounding share a vote.
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g %s", n.value, n.unit.c_str());
    return buf;
  } catch (const std::exception&) {
    return scalar_text(a->value);
  }
}

Selection select(std::span<const Candidate> candidates, RerankMode mode) {
  if (candidates.empty()) throw EmptyCandidates("select needs at least one candidate");
  Selection sel;

  std::string modal;
  if (mode == RerankMode::majority) {
    std::map<std::string, int> votes;
    int best = 0;
    for (const auto& c : candidates) {
      if (c.answer_key.empty()) continue;
      const int v = ++votes[c.answer_key];
      if (v > best) best = v;
    }
    for (const auto& c : candidates)
      if (!c.answer_key.empty() && votes[c.answer_key] == best) {
        modal = c.answer_key;
        break;
      }
  }

  double best_total = -INFINITY;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    RerankScore s;
    s.components = rule_components(c.report);
    s.rule_score = rule_score(c.report);
    if (mode == RerankMode::learned && c.judge) {
      s.judge_score = judge_score(*c.judge);
      s.components["judge"] = *s.judge_score;
    }
    if (mode == RerankMode::majority && !modal.empty() && c.answer_key == modal) {
      s.majority_bonus = kMajorityBonus;
      s.components["majority"] = kMajorityBonus;
    }
    s.total = s.rule_score + s.judge_score.value_or(0.0) + s.majority_bonus;
    if (s.total > best_total) {
      best_total = s.total;
      sel.index = i;
    }
    sel.scores.push_back(std::move(s));
  }
  return sel;
}

}  // namespace wmw
