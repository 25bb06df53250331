#include "wmw/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "wmw/answer.hpp"

namespace wmw {

namespace {

struct Tally {
  int n = 0;
  int correct = 0;
  int parsed = 0;
  int state_valid = 0, state_decided = 0;
  int trans_valid = 0, trans_decided = 0;
  int faith_valid = 0, faith_decided = 0;
  int trace_valid = 0, trace_decided = 0;
  int correct_invalid = 0, correct_decided = 0;
  int abstained = 0;
  double latency = 0.0;

  void add(const EvalRecord& r) {
    ++n;
    if (r.answer_correct) ++correct;
    if (r.parsed) ++parsed;
    latency += r.latency_ms;
    auto count = [](Verdict v, int& valid, int& decided) {
      if (v == Verdict::abstain) return;
      ++decided;
      if (v == Verdict::valid) ++valid;
    };
    count(effective(r.report, r.report.z_state), state_valid, state_decided);
    count(effective(r.report, r.report.z_trans), trans_valid, trans_decided);
    count(effective(r.report, r.report.z_faith), faith_valid, faith_decided);
    const Verdict tv = trace_verdict(r.report);
    count(tv, trace_valid, trace_decided);
    if (tv == Verdict::abstain) ++abstained;
    if (r.answer_correct) {
      if (tv == Verdict::invalid) ++correct_invalid;
      if (tv != Verdict::abstain) ++correct_decided;
    }
  }
};

std::optional<double> ratio(int num, int den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / den;
}

std::optional<double> from_tally(const Tally& t, Metric m) {
  switch (m) {
    case Metric::answer_acc: return ratio(t.correct, t.n);
    case Metric::state_acc: return ratio(t.state_valid, t.state_decided);
    case Metric::trans_acc: return ratio(t.trans_valid, t.trans_decided);
    case Metric::trace_ans: return ratio(t.faith_valid, t.faith_decided);
    case Metric::trace_valid: return ratio(t.trace_valid, t.trace_decided);
    case Metric::hir_all: return ratio(t.correct_invalid, t.n);
    case Metric::hir_correct: return ratio(t.correct_invalid, t.correct_decided);
    case Metric::abstention: return ratio(t.abstained, t.n);
  }
  return std::nullopt;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

constexpr std::pair<Metric, std::string_view> kMetricNames[] = {
    {Metric::answer_acc, "answer_acc"}, {Metric::state_acc, "state_acc"},     {Metric::trans_acc, "trans_acc"},
    {Metric::trace_ans, "trace_ans"},   {Metric::trace_valid, "trace_valid"}, {Metric::hir_all, "hir_all"},
    {Metric::hir_correct, "hir_correct"}, {Metric::abstention, "abstention"},
};

}  // namespace

bool score_answer(const std::optional<Answer>& model, const std::optional<Answer>& gold, AnswerType type,
                  std::string_view canonical_unit) {
  if (!model || !gold) return false;
  try {
    return answers_equal(normalize_answer(*model, type, canonical_unit),
                         normalize_answer(*gold, type, canonical_unit));
  } catch (const std::exception&) {
    return false;
  }
}

Verdict effective(const VerifierReport& r, Verdict field) {
  return r.z_schema == Verdict::invalid ? Verdict::invalid : field;
}

Verdict trace_verdict(const VerifierReport& r) {
  const Verdict v[] = {effective(r, r.z_state), effective(r, r.z_trans), effective(r, r.z_faith)};
  if (std::find(std::begin(v), std::end(v), Verdict::invalid) != std::end(v)) return Verdict::invalid;
  if (std::find(std::begin(v), std::end(v), Verdict::abstain) != std::end(v)) return Verdict::abstain;
  return Verdict::valid;
}

Json to_json(const MetricsSummary& m) {
  Json per_source = Json::object();
  for (const auto& [src, b] : m.per_source)
    per_source[src] = {{"n", b.n}, {"answer_acc", b.answer_acc}, {"trace_valid", opt(b.trace_valid)},
                       {"hir_correct", opt(b.hir_correct)}};
  Json ci = Json::object();
  for (const auto& [k, v] : m.ci) ci[k] = {v.first, v.second};
  return Json{{"n", m.n},
              {"answer_acc", m.answer_acc},
              {"parse_rate", m.parse_rate},
              {"state_acc", opt(m.state_acc)},
              {"trans_acc", opt(m.trans_acc)},
              {"trace_ans_rate", opt(m.trace_ans_rate)},
              {"trace_valid", opt(m.trace_valid)},
              {"hir_all", m.hir_all},
              {"hir_correct", opt(m.hir_correct)},
              {"abstention_rate", m.abstention_rate},
              {"mean_latency_ms", m.mean_latency_ms},
              {"per_source", per_source},
              {"ci", ci}};
}

MetricsSummary compute_metrics(std::span<const EvalRecord> records) {
  if (records.empty()) throw EmptyInput("compute_metrics needs at least one record");
  Tally all;
  std::map<std::string, Tally> by_source;
  for (const auto& r : records) {
    all.add(r);
    by_source[r.source].add(r);
  }
  MetricsSummary m;
  m.n = all.n;
  m.answer_acc = *from_tally(all, Metric::answer_acc);
  m.parse_rate = *ratio(all.parsed, all.n);
  m.state_acc = from_tally(all, Metric::state_acc);
  m.trans_acc = from_tally(all, Metric::trans_acc);
  m.trace_ans_rate = from_tally(all, Metric::trace_ans);
  m.trace_valid = from_tally(all, Metric::trace_valid);
  m.hir_all = *from_tally(all, Metric::hir_all);
  m.hir_correct = from_tally(all, Metric::hir_correct);
  m.abstention_rate = *from_tally(all, Metric::abstention);
  m.mean_latency_ms = all.latency / all.n;
  for (const auto& [src, t] : by_source)
    m.per_source[src] = {t.n, *from_tally(t, Metric::answer_acc), from_tally(t, Metric::trace_valid),
                         from_tally(t, Metric::hir_correct)};
  return m;
}

Gaps compute_gaps(const std::map<Condition, double>& acc) {
  auto get = [&](Condition c) {
    auto it = acc.find(c);
    if (it == acc.end()) throw MissingCondition("accuracy for " + std::string(to_string(c)) + " is required");
    return it->second;
  };
  const double trace = get(Condition::full_trace);
  const double state = get(Condition::gold_state_answer);
  const double trans = get(Condition::gold_trans_answer);
  return {100.0 * (state - trace), 100.0 * (trans - state)};
}

double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw LengthMismatch("kappa needs paired lists of equal length");
  if (a.empty()) throw EmptyInput("kappa needs at least one pair");
  const double n = static_cast<double>(a.size());
  // Chance agreement from the pooled category shares of both raters.
  std::map<std::string, int> pooled;
  int agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    ++pooled[a[i]];
    ++pooled[b[i]];
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [k, c] : pooled) pe += (c / (2 * n)) * (c / (2 * n));
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

std::string_view to_string(Metric m) {
  for (const auto& [k, v] : kMetricNames)
    if (k == m) return v;
  return "answer_acc";
}

std::optional<Metric> metric_from_string(std::string_view s) {
  for (const auto& [k, v] : kMetricNames)
    if (v == s) return k;
  return std::nullopt;
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> v = [] {
    std::vector<Metric> out;
    for (const auto& [k, name] : kMetricNames) out.push_back(k);
    return out;
  }();
  return v;
}

std::optional<double> metric_value(std::span<const EvalRecord> records, std::span<const std::size_t> idx, Metric m) {
  Tally t;
  for (std::size_t i : idx) t.add(records[i]);
  return from_tally(t, m);
}

std::optional<double> metric_value(std::span<const EvalRecord> records, Metric m) {
  Tally t;
  for (const auto& r : records) t.add(r);
  return from_tally(t, m);
}

std::string_view to_string(EvidenceClass c) {
  switch (c) {
    case EvidenceClass::primary: return "primary";
    case EvidenceClass::caveat: return "caveat";
    case EvidenceClass::qualitative: return "qualitative";
  }
  return "qualitative";
}

EvidenceClass classify_label(double f1, double kappa) {
  if (f1 >= 0.70 && kappa >= 0.65) return EvidenceClass::primary;
  if (f1 >= 0.50) return EvidenceClass::caveat;
  return EvidenceClass::qualitative;
}

std::vector<LabelAgreement> label_agreement(std::span<const std::set<Label>> predicted,
                                            std::span<const std::set<Label>> reference) {
  if (predicted.size() != reference.size()) throw LengthMismatch("label sets must be paired");
  if (predicted.empty()) throw EmptyInput("no items to compare");
  std::vector<LabelAgreement> out;
  for (Label l : all_labels()) {
    int tp = 0, fp = 0, fn = 0;
    std::vector<std::string> pa, pb;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const bool p = predicted[i].contains(l);
      const bool r = reference[i].contains(l);
      tp += p && r;
      fp += p && !r;
      fn += !p && r;
      pa.emplace_back(p ? "1" : "0");
      pb.emplace_back(r ? "1" : "0");
    }
    LabelAgreement a;
    a.label = l;
    a.precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    a.recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    a.f1 = a.precision + a.recall > 0 ? 2 * a.precision * a.recall / (a.precision + a.recall) : 0.0;
    a.kappa = cohen_kappa(pa, pb);
    a.evidence = classify_label(a.f1, a.kappa);
    out.push_back(a);
  }
  return out;
}

bool annotator_passes(int correct_on_gold, int gold_total) {
  return gold_total > 0 && static_cast<double>(correct_on_gold) / gold_total >= kAnnotatorGate;
}

const std::set<Label>& detectable_labels() {
  static const std::set<Label> s{Label::force, Label::relation, Label::unit_scale,
                                 Label::temporal, Label::faithfulness, Label::transition};
  return s;
}

Json to_json(const PrescreenReport& r) {
  Json fp = Json::object(), det = Json::object(), counts = Json::object(), part = Json::object();
  for (const auto& [l, v] : r.false_positive_rate) fp[std::string(to_string(l))] = v;
  for (const auto& [l, v] : r.detection_rate) det[std::string(to_string(l))] = opt(v);
  for (const auto& [l, v] : r.rejected_per_label) counts[std::string(to_string(l))] = v;
  for (const auto& [p, v] : r.detection_by_partition) part[std::string(to_string(p))] = opt(v);
  return Json{{"gold_count", r.gold_count},
              {"rejected_count", r.rejected_count},
              {"false_positive_rate", fp},
              {"detection_rate", det},
              {"rejected_per_label", counts},
              {"detection_by_partition", part},
              {"fp_target", kFalsePositiveTarget},
              {"detection_target", kDetectionTarget},
              {"fp_pass", r.fp_pass},
              {"detection_pass", r.detection_pass}};
}

PrescreenReport prescreen(std::span<const Trace> gold, std::span<const PreferencePair> rejected,
                          const VerifierConfig& config) {
  PrescreenReport out;
  out.gold_count = static_cast<int>(gold.size());
  out.rejected_count = static_cast<int>(rejected.size());

  const auto gold_reports = verify_batch(gold, true, config);
  std::map<Label, int> fp;
  for (const auto& r : gold_reports)
    for (Label l : r.labels) ++fp[l];
  for (Label l : all_labels()) {
    const double rate = gold.empty() ? 0.0 : static_cast<double>(fp[l]) / gold.size();
    out.false_positive_rate[l] = rate;
    if (rate >= kFalsePositiveTarget) out.fp_pass = false;
  }

  std::vector<Trace> rej;
  rej.reserve(rejected.size());
  for (const auto& p : rejected) {
    Trace t = p.rejected;
    // The rejected copy carries the chosen metadata, which is the gold.
    t.metadata = p.chosen.metadata;
    rej.push_back(std::move(t));
  }
  const auto rej_reports = verify_batch(rej, true, config);
  std::map<Label, int> hits;
  std::map<Partition, std::pair<int, int>> by_part;
  for (std::size_t i = 0; i < rejected.size(); ++i) {
    const auto& p = rejected[i];
    const auto accepted = accepted_detection_labels(p.label);
    const bool hit = std::any_of(rej_reports[i].labels.begin(), rej_reports[i].labels.end(),
                                 [&](Label l) { return accepted.contains(l); });
    ++out.rejected_per_label[p.label];
    hits[p.label] += hit;
    auto& bp = by_part[p.perturbation_family];
    bp.first += hit;
    ++bp.second;
  }
  for (Label l : all_labels()) {
    const int n = out.rejected_per_label.contains(l) ? out.rejected_per_label[l] : 0;
    out.detection_rate[l] = ratio(hits[l], n);
    if (detectable_labels().contains(l) && out.detection_rate[l] && *out.detection_rate[l] <= kDetectionTarget)
      out.detection_pass = false;
  }
  for (Partition p : {Partition::seen, Partition::held_out})
    out.detection_by_partition[p] = ratio(by_part[p].first, by_part[p].second);
  return out;
}

}  // namespace wmw
