#include <map>

#include "wmw/answer.hpp"
#include "wmw/parse.hpp"
#include "wmw/runner.hpp"

namespace wmw {

namespace {

std::optional<double> ratio(int num, int den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / den;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

bool same_answer(const std::optional<Answer>& a, const std::optional<Answer>& b, const Metadata& m) {
  if (!a || !b) return false;
  try {
    return answers_equal(normalize_answer(*a, m.answer_type, m.canonical_unit),
                         normalize_answer(*b, m.answer_type, m.canonical_unit));
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

Json to_json(const StressReport& r) {
  return Json{{"trace_ablation",
               {{"n", r.ablation_n},
                {"trace_acc", opt(r.trace_acc)},
                {"answer_only_acc", opt(r.answer_only_acc)},
                {"answer_change_rate", opt(r.ablation_change_rate)}}},
              {"counterfactual",
               {{"n", r.counterfactual_n},
                {"excluded_noop", r.counterfactual_excluded},
                {"change_rate", opt(r.counterfactual_change_rate)}}},
              {"perturbation_detection",
               {{"seen", opt(r.seen_detection)}, {"held_out", opt(r.heldout_detection)}}},
              {"natural_pairs", {{"n", r.natural_pairs}, {"consistency_rate", opt(r.natural_consistency)}}}};
}

StressReport stress_tests(std::span<const Trace> bank, std::span<const RunRecord> full_trace,
                          std::span<const RunRecord> answer_only, std::span<const PreferencePair> pairs,
                          const RunConfig& config, RunContext* ctx) {
  if (full_trace.empty() || answer_only.empty())
    throw MissingRuns("stress tests need both full_trace and answer_only runs");

  std::map<std::string, const Trace*> gold;
  for (const auto& t : bank) gold[t.id] = &t;
  std::map<std::string, const RunRecord*> traced, direct;
  for (const auto& r : full_trace)
    if (r.selected) traced[r.example_id] = &r;
  for (const auto& r : answer_only) direct[r.example_id] = &r;

  StressReport out;

  // Trace ablation: same question with and without trace elicitation.
  int both = 0, changed = 0, acc_t = 0, acc_a = 0;
  for (const auto& [id, rt] : traced) {
    auto ra = direct.find(id);
    auto g = gold.find(id);
    if (ra == direct.end() || g == gold.end() || !g->second->metadata) continue;
    ++both;
    acc_t += rt->answer_correct;
    acc_a += ra->second->answer_correct;
    if (!same_answer(rt->answer, ra->second->answer, *g->second->metadata)) ++changed;
  }
  out.ablation_n = both;
  out.trace_acc = ratio(acc_t, both);
  out.answer_only_acc = ratio(acc_a, both);
  out.ablation_change_rate = ratio(changed, both);

  // Counterfactual editing: perturb one gold state variable, re-ask with the
  // edited state injected, count answer flips.
  if (ctx) {
    const Perturbation* edit = find_perturbation("perturb_state_variable");
    RateLimiter limiter(config.rate_limit_rpm, ctx->clock);
    int n = 0, flips = 0;
    std::uint64_t i = 0;
    for (const auto& t : bank) {
      const std::uint64_t index = i++;
      auto rt = traced.find(t.id);
      if (rt == traced.end() || !rt->second->answer || !t.metadata) continue;
      Rng rng = Rng::substream(config.seed, index);
      auto edited = apply_perturbation(t, *edit, rng);
      if (!edited) {
        ++out.counterfactual_excluded;
        continue;
      }
      ChatRequest req;
      req.model = config.api_model();
      req.messages = build_prompt(edited->trace, Condition::gold_state_answer);
      req.temperature = 0.0;
      req.top_p = config.top_p;
      req.max_tokens = config.max_completion_tokens;
      req.max_tokens_field = config.max_tokens_field;
      try {
        auto res = call_with_retry(ctx->endpoint, req, limiter, ctx->clock, config.backoff_s);
        std::optional<Answer> again;
        try {
          again = parse_answer_reply(res.response.text);
        } catch (const ParseError&) {
        }
        ++n;
        if (!same_answer(again, rt->second->answer, *t.metadata)) ++flips;
      } catch (const EndpointError&) {
        ++out.counterfactual_excluded;
      }
    }
    out.counterfactual_n = n;
    out.counterfactual_change_rate = ratio(flips, n);
  }

  // Detection on seen versus held-out perturbation families.
  if (!pairs.empty()) {
    const PrescreenReport pre = prescreen({}, pairs);
    out.seen_detection = pre.detection_by_partition.at(Partition::seen);
    out.heldout_detection = pre.detection_by_partition.at(Partition::held_out);
  }

  // Natural rejected traces: the model's own invalid traces against gold.
  int valid_n = 0, valid_ok = 0, invalid_n = 0, invalid_ok = 0;
  for (const auto& [id, r] : traced) {
    if (!gold.contains(id)) continue;
    const Verdict v = trace_verdict(ensemble(r->report, r->judge));
    if (v == Verdict::valid) {
      ++valid_n;
      valid_ok += r->answer_correct;
    } else if (v == Verdict::invalid) {
      ++invalid_n;
      invalid_ok += r->answer_correct;
      if (r->parsed) ++out.natural_pairs;
    }
  }
  if (valid_n && invalid_n)
    out.natural_consistency = static_cast<double>(valid_ok) / valid_n - static_cast<double>(invalid_ok) / invalid_n;
  return out;
}

}  // namespace wmw
