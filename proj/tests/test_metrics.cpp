#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "wmw/metrics.hpp"
#include "wmw/rng.hpp"

using namespace wmw;
using test::eval;

namespace {

// Brute-force oracle: every metric straight from its definition, written
// without the library's tally.
struct Oracle {
  std::optional<double> answer_acc, state_acc, trans_acc, trace_ans, trace_valid, hir_all, hir_correct, abstention;
};

Verdict eff(const VerifierReport& r, Verdict v) { return r.z_schema == Verdict::invalid ? Verdict::invalid : v; }

std::optional<double> frac(const std::vector<bool>& hits) {
  if (hits.empty()) return std::nullopt;
  return static_cast<double>(std::count(hits.begin(), hits.end(), true)) / static_cast<double>(hits.size());
}

Oracle oracle(const std::vector<EvalRecord>& rs) {
  std::vector<bool> acc, st, tr, fa, tv, hall, hcor, ab;
  for (const auto& r : rs) {
    const Verdict s = eff(r.report, r.report.z_state), t = eff(r.report, r.report.z_trans),
                  f = eff(r.report, r.report.z_faith);
    Verdict trace = Verdict::valid;
    if (s == Verdict::abstain || t == Verdict::abstain || f == Verdict::abstain) trace = Verdict::abstain;
    if (s == Verdict::invalid || t == Verdict::invalid || f == Verdict::invalid) trace = Verdict::invalid;
    acc.push_back(r.answer_correct);
    if (s != Verdict::abstain) st.push_back(s == Verdict::valid);
    if (t != Verdict::abstain) tr.push_back(t == Verdict::valid);
    if (f != Verdict::abstain) fa.push_back(f == Verdict::valid);
    if (trace != Verdict::abstain) tv.push_back(trace == Verdict::valid);
    hall.push_back(r.answer_correct && trace == Verdict::invalid);
    if (r.answer_correct && trace != Verdict::abstain) hcor.push_back(trace == Verdict::invalid);
    ab.push_back(trace == Verdict::abstain);
  }
  return {frac(acc), frac(st), frac(tr), frac(fa), frac(tv), frac(hall), frac(hcor), frac(ab)};
}

std::vector<EvalRecord> random_records(std::uint64_t seed, int n) {
  Rng rng(seed);
  const Verdict vs[] = {Verdict::valid, Verdict::invalid, Verdict::abstain};
  std::vector<EvalRecord> out;
  for (int i = 0; i < n; ++i) {
    EvalRecord e;
    e.answer_correct = rng.chance(0.6);
    e.parsed = rng.chance(0.9);
    e.report.z_schema = rng.chance(0.1) ? Verdict::invalid : Verdict::valid;
    e.report.z_state = vs[rng.below(3)];
    e.report.z_trans = vs[rng.below(3)];
    e.report.z_faith = vs[rng.below(3)];
    e.source = rng.chance(0.5) ? "synthetic" : "natural";
    e.latency_ms = rng.uniform(10, 100);
    out.push_back(e);
  }
  return out;
}

void check_opt(std::optional<double> got, std::optional<double> want) {
  REQUIRE(got.has_value() == want.has_value());
  if (got) CHECK(*got == doctest::Approx(*want));
}

}  // namespace

TEST_CASE("hallucination rates on a four-record example") {
  const std::vector<EvalRecord> rs{eval(true, Verdict::invalid), eval(true, Verdict::valid),
                                   eval(true, Verdict::valid), eval(false, Verdict::valid)};
  const auto m = compute_metrics(rs);
  CHECK(m.hir_all == doctest::Approx(0.25));
  CHECK(*m.hir_correct == doctest::Approx(1.0 / 3.0));
  CHECK(m.answer_acc == doctest::Approx(0.75));
  CHECK(*m.trace_valid == doctest::Approx(0.75));
}

TEST_CASE("degenerate hallucination cases") {
  const std::vector<EvalRecord> clean(5, eval(true, Verdict::valid));
  const auto a = compute_metrics(clean);
  CHECK(a.hir_all == 0.0);
  CHECK(*a.hir_correct == 0.0);
  const std::vector<EvalRecord> wrong(5, eval(false, Verdict::invalid));
  const auto b = compute_metrics(wrong);
  CHECK(b.hir_all == 0.0);
  CHECK_FALSE(b.hir_correct.has_value());
}

TEST_CASE("gap examples") {
  auto gaps = [](double trace, double state, double trans) {
    return compute_gaps({{Condition::full_trace, trace},
                         {Condition::gold_state_answer, state},
                         {Condition::gold_trans_answer, trans}});
  };
  CHECK(gaps(0.63, 0.65, 0.65).vsg == doctest::Approx(2.0));
  CHECK(gaps(0.5, 0.5, 0.5).vsg == 0.0);
  CHECK(gaps(0.5, 0.5, 0.5).tg == 0.0);
  CHECK(gaps(0.70, 0.61, 0.61).vsg == doctest::Approx(-9.0));
}

TEST_CASE("abstentions leave validity denominators and hir_correct") {
  const std::vector<EvalRecord> rs{eval(true, Verdict::invalid), eval(true, Verdict::abstain),
                                   eval(false, Verdict::abstain), eval(true, Verdict::valid)};
  const auto m = compute_metrics(rs);
  CHECK(*m.trace_valid == doctest::Approx(0.5));
  CHECK(*m.hir_correct == doctest::Approx(0.5));
  CHECK(m.hir_all == doctest::Approx(0.25));
  CHECK(m.abstention_rate == doctest::Approx(0.5));
}

TEST_CASE("all-abstain records leave validity undefined") {
  const std::vector<EvalRecord> rs{eval(true, Verdict::abstain), eval(false, Verdict::abstain)};
  const auto m = compute_metrics(rs);
  CHECK_FALSE(m.trace_valid.has_value());
  CHECK_FALSE(m.hir_correct.has_value());
  CHECK(m.abstention_rate == 1.0);
}

TEST_CASE("schema failure counts as invalid on every deeper field") {
  VerifierReport r = test::report_with(Verdict::abstain, Verdict::valid, Verdict::valid);
  r.z_schema = Verdict::invalid;
  CHECK(effective(r, r.z_state) == Verdict::invalid);
  CHECK(trace_verdict(r) == Verdict::invalid);
  CHECK(trace_verdict(test::report_with(Verdict::valid, Verdict::abstain, Verdict::valid)) == Verdict::abstain);
  CHECK(trace_verdict(test::report_with(Verdict::invalid, Verdict::abstain, Verdict::valid)) == Verdict::invalid);
}

TEST_CASE("compute_metrics matches the brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto rs = random_records(seed, 1 + static_cast<int>(seed * 7 % 60));
    const auto m = compute_metrics(rs);
    const auto o = oracle(rs);
    CAPTURE(seed);
    CHECK(m.answer_acc == doctest::Approx(*o.answer_acc));
    check_opt(m.state_acc, o.state_acc);
    check_opt(m.trans_acc, o.trans_acc);
    check_opt(m.trace_ans_rate, o.trace_ans);
    check_opt(m.trace_valid, o.trace_valid);
    CHECK(m.hir_all == doctest::Approx(*o.hir_all));
    check_opt(m.hir_correct, o.hir_correct);
    CHECK(m.abstention_rate == doctest::Approx(*o.abstention));
    int n_src = 0;
    for (const auto& [src, b] : m.per_source) n_src += b.n;
    CHECK(n_src == m.n);
  }
}

TEST_CASE("empty input throws") {
  CHECK_THROWS_AS(compute_metrics(std::vector<EvalRecord>{}), EmptyInput);
}

TEST_CASE("gaps are signed percentage points") {
  const auto g = compute_gaps({{Condition::full_trace, 0.50},
                               {Condition::gold_state_answer, 0.60},
                               {Condition::gold_trans_answer, 0.55}});
  CHECK(g.vsg == doctest::Approx(10.0));
  CHECK(g.tg == doctest::Approx(-5.0));
  CHECK_THROWS_AS(compute_gaps({{Condition::full_trace, 0.5}}), MissingCondition);
}

TEST_CASE("cohen kappa against a hand-worked table") {
  // 20 yes/yes, 5 yes/no, 10 no/yes, 15 no/no: po = 0.7; pooled yes share
  // 55/100, so pe = 0.55^2 + 0.45^2 = 0.505.
  std::vector<std::string> a, b;
  auto add = [&](int n, const char* x, const char* y) {
    for (int i = 0; i < n; ++i) {
      a.emplace_back(x);
      b.emplace_back(y);
    }
  };
  add(20, "y", "y");
  add(5, "y", "n");
  add(10, "n", "y");
  add(15, "n", "n");
  CHECK(cohen_kappa(a, b) == doctest::Approx((0.7 - 0.505) / (1 - 0.505)));
  CHECK(cohen_kappa(a, b) == doctest::Approx(cohen_kappa(b, a)));
  CHECK(cohen_kappa(a, a) == doctest::Approx(1.0));
  const std::vector<std::string> same{"x", "x"};
  CHECK(cohen_kappa(same, same) == 1.0);
  CHECK_THROWS_AS(cohen_kappa(a, same), LengthMismatch);
}

TEST_CASE("kappa on the four-item example") {
  // po = 3/4; pooled shares A 3/8, B 5/8, pe = 34/64
  const std::vector<std::string> a{"A", "A", "B", "B"}, b{"A", "B", "B", "B"};
  CHECK(cohen_kappa(a, b) == doctest::Approx((0.75 - 0.53125) / (1 - 0.53125)));
  CHECK(cohen_kappa(a, b) == doctest::Approx(0.4667).epsilon(1e-4));
}

TEST_CASE("kappa of independent raters tends to zero") {
  Rng rng(99);
  std::vector<std::string> a, b;
  for (int i = 0; i < 20000; ++i) {
    a.push_back(rng.chance(0.5) ? "x" : "y");
    b.push_back(rng.chance(0.5) ? "x" : "y");
  }
  CHECK(std::abs(cohen_kappa(a, b)) < 0.03);
}

TEST_CASE("percentile interpolates") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(percentile(v, 0.5) == doctest::Approx(2.5));
  CHECK(percentile(v, 0.0) == 1);
  CHECK(percentile(v, 1.0) == 4);
  CHECK(percentile(v, 0.025) == doctest::Approx(1.075));
}

TEST_CASE("bootstrap: parallel equals serial, interval brackets the point") {
  const auto rs = random_records(42, 80);
  for (Metric m : all_metrics()) {
    CAPTURE(to_string(m));
    const auto par = bootstrap_ci(rs, m, 500, 7);
    const auto ser = bootstrap_ci_serial(rs, m, 500, 7);
    REQUIRE(par.has_value() == ser.has_value());
    if (!par) continue;
    CHECK(par->lo == ser->lo);
    CHECK(par->hi == ser->hi);
    CHECK(par->point == *metric_value(rs, m));
    CHECK(par->lo <= par->point + 1e-12);
    CHECK(par->point <= par->hi + 1e-12);
  }
}

TEST_CASE("bootstrap: seed changes the interval, constant data gives a point interval") {
  const auto rs = random_records(5, 60);
  const auto a = *bootstrap_ci(rs, Metric::answer_acc, 300, 1);
  CHECK(a.lo == bootstrap_ci(rs, Metric::answer_acc, 300, 1)->lo);
  // at n = 60 percentiles move in 1/60 steps, so look across several seeds
  bool moved = false;
  for (std::uint64_t s = 2; s < 12 && !moved; ++s) {
    const auto b = *bootstrap_ci(rs, Metric::answer_acc, 300, s);
    moved = a.lo != b.lo || a.hi != b.hi;
  }
  CHECK(moved);
  std::vector<EvalRecord> same(30, eval(true, Verdict::valid));
  const auto c = *bootstrap_ci(same, Metric::answer_acc, 200, 1);
  CHECK(c.lo == 1.0);
  CHECK(c.hi == 1.0);
  std::vector<EvalRecord> wrong(10, eval(false, Verdict::valid));
  CHECK_FALSE(bootstrap_ci(wrong, Metric::hir_correct, 100, 1).has_value());
}

TEST_CASE("bootstrap interval covers a known proportion") {
  // 100 records, 70 correct: the normal-approximation 95% interval is
  // about [0.61, 0.79]. The percentile interval should be close.
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(eval(i < 70, Verdict::valid));
  const auto ci = *bootstrap_ci(rs, Metric::answer_acc, 2000, 3);
  const double se = std::sqrt(0.7 * 0.3 / 100);
  CHECK(ci.lo == doctest::Approx(0.7 - 1.96 * se).epsilon(0.03));
  CHECK(ci.hi == doctest::Approx(0.7 + 1.96 * se).epsilon(0.03));
}

TEST_CASE("evidence classes") {
  CHECK(classify_label(0.70, 0.65) == EvidenceClass::primary);
  CHECK(classify_label(0.70, 0.64) == EvidenceClass::caveat);
  CHECK(classify_label(0.69, 0.90) == EvidenceClass::caveat);
  CHECK(classify_label(0.50, 0.0) == EvidenceClass::caveat);
  CHECK(classify_label(0.49, 0.9) == EvidenceClass::qualitative);
}

TEST_CASE("label agreement against hand counts") {
  // force: tp 2, fp 1, fn 1 over 5 items.
  const std::vector<std::set<Label>> pred{{Label::force}, {Label::force}, {Label::force}, {}, {}};
  const std::vector<std::set<Label>> ref{{Label::force}, {Label::force}, {}, {Label::force}, {}};
  const auto rows = label_agreement(pred, ref);
  CHECK(rows.size() == kLabelCount);
  const auto it = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.label == Label::force; });
  REQUIRE(it != rows.end());
  CHECK(it->precision == doctest::Approx(2.0 / 3));
  CHECK(it->recall == doctest::Approx(2.0 / 3));
  CHECK(it->f1 == doctest::Approx(2.0 / 3));
  // po = 3/5; pooled share of "1" is 6/10, so pe = 0.36 + 0.16
  CHECK(it->kappa == doctest::Approx((0.6 - 0.52) / 0.48));
  CHECK_THROWS_AS(label_agreement(pred, std::vector<std::set<Label>>{}), LengthMismatch);
}

TEST_CASE("annotator gate") {
  CHECK(annotator_passes(8, 10));
  CHECK_FALSE(annotator_passes(7, 10));
  CHECK_FALSE(annotator_passes(0, 0));
}

TEST_CASE("prescreen on the seeded bank meets both targets") {
  const auto& bank = test::seed_bank();
  const std::vector<Trace> few(bank.begin(), bank.begin() + 100);
  const auto pairs = build_pairs(few, 16, 2026);
  const auto r = prescreen(bank, pairs);
  CHECK(r.gold_count == 200);
  CHECK(r.rejected_count == static_cast<int>(pairs.size()));
  CHECK(r.fp_pass);
  CHECK(r.detection_pass);
  for (Label l : detectable_labels()) {
    CAPTURE(to_string(l));
    CHECK(r.false_positive_rate.at(l) < kFalsePositiveTarget);
    REQUIRE(r.detection_rate.at(l).has_value());
    CHECK(*r.detection_rate.at(l) > kDetectionTarget);
  }
}

TEST_CASE("audit sample: per-model quotas, gold checks, family balance") {
  std::vector<AuditCandidate> pool;
  const char* models[] = {"m1", "m2", "m3"};
  const char* fams[] = {"wave", "lever", "optics", "pulley"};
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 200; ++i) {
      AuditCandidate c;
      c.id = std::string(models[m]) + "-" + std::to_string(i);
      c.model = models[m];
      c.family = fams[i % 4];
      c.gold = i % 5 == 0;
      if (i % 7 == 0) c.predicted_label = Label::temporal;
      pool.push_back(c);
    }
  const auto sample = audit_sample(pool, 90, 15, 11);
  CHECK(sample.size() == 90);
  std::map<std::string, int> per_model, gold_per_model, per_family;
  std::set<std::string> ids;
  for (const auto& item : sample) {
    ++per_model[item.candidate.model];
    if (item.gold_check) {
      ++gold_per_model[item.candidate.model];
      CHECK(item.candidate.gold);
    }
    ++per_family[item.candidate.family];
    CHECK(ids.insert(item.candidate.id).second);
  }
  for (const auto* m : models) {
    CHECK(per_model[m] == 30);
    CHECK(gold_per_model[m] == 5);
  }
  for (const auto* f : fams) CHECK(per_family[f] >= 15);
  CHECK(audit_sample(pool, 90, 15, 11).size() == 90);
  CHECK_THROWS_AS(audit_sample(pool, 1000, 10, 1), InsufficientRecords);
  CHECK_THROWS_AS(audit_sample(pool, 10, 20, 1), InsufficientRecords);
}

TEST_CASE("audit sample of 400 with 50 gold checks from 2800") {
  std::vector<AuditCandidate> pool;
  for (int i = 0; i < 2800; ++i)
    pool.push_back({std::to_string(i), "f" + std::to_string(i % 17), "m" + std::to_string(i % 7), std::nullopt,
                    i % 6 == 0});
  const auto s = audit_sample(pool, 400, 50, 2026);
  CHECK(s.size() == 400);
  CHECK(std::count_if(s.begin(), s.end(), [](const AuditItem& x) { return x.gold_check; }) == 50);
}

TEST_CASE("prescreen with no rejected traces leaves detection undefined") {
  const std::vector<Trace> few(test::seed_bank().begin(), test::seed_bank().begin() + 20);
  const auto r = prescreen(few, std::vector<PreferencePair>{});
  for (Label l : detectable_labels()) CHECK_FALSE(r.detection_rate.at(l).has_value());
}

TEST_CASE("audit sample oversamples rare labels") {
  std::vector<AuditCandidate> pool;
  for (int i = 0; i < 2000; ++i) {
    AuditCandidate c;
    c.id = std::to_string(i);
    c.model = "m";
    c.family = "wave";
    if (i % 2 == 0) c.predicted_label = Label::unit_scale;
    pool.push_back(c);
  }
  int rare = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (const auto& item : audit_sample(pool, 100, 0, s)) {
      ++total;
      rare += item.candidate.predicted_label.has_value();
    }
  // weight 2 vs 1 on equal halves: expected share near 2/3 for small samples
  const double share = static_cast<double>(rare) / total;
  CHECK(share > 0.6);
  CHECK(share < 0.72);
}
