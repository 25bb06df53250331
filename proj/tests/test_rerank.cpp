#include <doctest.h>

#include "support.hpp"
#include "wmw/rerank.hpp"
#include "wmw/rng.hpp"

using namespace wmw;
using test::report_with;

namespace {

Candidate cand(VerifierReport r, std::string key = {}, std::optional<JudgeVerdict> j = {}) {
  Candidate c;
  c.report = std::move(r);
  c.answer_key = std::move(key);
  c.judge = std::move(j);
  return c;
}

const VerifierReport kClean = report_with(Verdict::valid, Verdict::valid, Verdict::valid);

}  // namespace

TEST_CASE("rule score") {
  CHECK(rule_score(kClean) == doctest::Approx(7.0));
  CHECK(rule_score(report_with(Verdict::abstain, Verdict::valid, Verdict::valid)) == doctest::Approx(5.5));
  CHECK(rule_score(report_with(Verdict::invalid, Verdict::valid, Verdict::valid, 1)) == doctest::Approx(4.5));
  CHECK(rule_score(report_with(Verdict::invalid, Verdict::invalid, Verdict::invalid, 0)) == doctest::Approx(1.0));
  CHECK(rule_score(report_with(Verdict::invalid, Verdict::invalid, Verdict::invalid, 2)) == doctest::Approx(0.0));
  VerifierReport broken = report_with(Verdict::abstain, Verdict::abstain, Verdict::abstain);
  broken.z_schema = Verdict::invalid;
  CHECK(rule_score(broken) == doctest::Approx(0.0));
  const auto c = rule_components(report_with(Verdict::valid, Verdict::abstain, Verdict::invalid, 2));
  CHECK(c.at("schema") == 1.0);
  CHECK(c.at("state") == 2.0);
  CHECK(c.at("transition") == 0.5);
  CHECK(c.at("answer_trace") == 0.0);
  CHECK(c.at("labels") == -1.0);
}

TEST_CASE("judge score") {
  JudgeVerdict j;
  CHECK(judge_score(j) == doctest::Approx(5.0));
  j.labels = {Label::state};
  j.field_errors = {{"state_0", "mass wrong"}};
  CHECK(judge_score(j) == doctest::Approx(2.5));
  JudgeVerdict k;
  k.labels = {Label::faithfulness, Label::unit_scale};
  k.answer_trace_consistent = false;
  CHECK(judge_score(k) == doctest::Approx(1.0));
  JudgeVerdict worst;
  for (Label l : all_labels()) worst.labels.insert(l);
  worst.field_errors = {{"transition", "x"}, {"state_1", "y"}};
  worst.answer_trace_consistent = false;
  CHECK(judge_score(worst) == doctest::Approx(5.0 - 9 - 1.5 - 2));  // not floored
}

TEST_CASE("select picks the argmax, first index on ties") {
  const std::vector<Candidate> cs{cand(report_with(Verdict::invalid, Verdict::valid, Verdict::valid, 1)),
                                  cand(kClean), cand(kClean)};
  const auto s = select(cs, RerankMode::rules);
  CHECK(s.index == 1);
  CHECK(s.scores.size() == 3);
  CHECK(s.scores[1].total == doctest::Approx(7.0));
  CHECK_THROWS_AS(select(std::vector<Candidate>{}, RerankMode::rules), EmptyCandidates);
  // rule scores 3.0, 7.0, 0.0
  VerifierReport three = report_with(Verdict::invalid, Verdict::valid, Verdict::invalid, 0);
  const std::vector<Candidate> trio{cand(three), cand(kClean),
                                    cand(report_with(Verdict::invalid, Verdict::invalid, Verdict::invalid, 2))};
  const auto t = select(trio, RerankMode::rules);
  CHECK(t.scores[0].total == doctest::Approx(3.0));
  CHECK(t.scores[2].total == doctest::Approx(0.0));
  CHECK(t.index == 1);
  CHECK(select(std::vector<Candidate>{cand(three)}, RerankMode::majority).index == 0);
}

TEST_CASE("learned mode adds the judge score") {
  JudgeVerdict bad;
  bad.labels = {Label::force, Label::relation};
  const std::vector<Candidate> cs{cand(kClean, "", bad), cand(report_with(Verdict::abstain, Verdict::valid,
                                                                          Verdict::valid), "", JudgeVerdict{})};
  // 7 + 3 = 10 vs 5.5 + 5 = 10.5
  const auto s = select(cs, RerankMode::learned);
  CHECK(s.index == 1);
  CHECK(*s.scores[0].judge_score == doctest::Approx(3.0));
  // rules mode ignores the judge
  CHECK(select(cs, RerankMode::rules).index == 0);
}

TEST_CASE("majority mode boosts the modal answer") {
  const std::vector<Candidate> cs{cand(kClean, "4.9 m/s²"),
                                  cand(report_with(Verdict::invalid, Verdict::valid, Verdict::valid), "9.8 m/s²"),
                                  cand(report_with(Verdict::invalid, Verdict::valid, Verdict::valid), "9.8 m/s²")};
  const auto s = select(cs, RerankMode::majority);
  CHECK(s.index == 1);
  CHECK(s.scores[1].majority_bonus == kMajorityBonus);
  CHECK(s.scores[0].majority_bonus == 0.0);
}

TEST_CASE("majority tie goes to the answer seen first") {
  const std::vector<Candidate> cs{cand(kClean, "b"), cand(kClean, "a"), cand(kClean, "a"), cand(kClean, "b")};
  const auto s = select(cs, RerankMode::majority);
  CHECK(s.index == 0);
  CHECK(s.scores[3].majority_bonus == kMajorityBonus);
  CHECK(s.scores[1].majority_bonus == 0.0);
}

TEST_CASE("vote keys group equal answers across units") {
  const Answer a{4.9, "m/s²", {}};
  const Answer b{490.0, "cm/s²", {}};
  const Answer c{4.9004, "m/s^2", {}};
  const auto ka = answer_vote_key(a, AnswerType::unit_bearing, "m/s²");
  CHECK(ka == answer_vote_key(b, AnswerType::unit_bearing, "m/s²"));
  CHECK(ka == answer_vote_key(c, AnswerType::unit_bearing, "m/s²"));
  CHECK(ka != answer_vote_key(Answer{5.2, "m/s²", {}}, AnswerType::unit_bearing, "m/s²"));
  CHECK(answer_vote_key(std::nullopt, AnswerType::numeric, "").empty());
}

TEST_CASE("property: a candidate with a strictly better report never loses to a worse copy") {
  Rng rng(17);
  const Verdict vs[] = {Verdict::valid, Verdict::abstain, Verdict::invalid};
  for (int trial = 0; trial < 300; ++trial) {
    VerifierReport worse = report_with(vs[rng.below(3)], vs[rng.below(3)], vs[rng.below(3)],
                                       static_cast<int>(rng.below(4)));
    VerifierReport better = worse;
    // improve one field by a step, or drop a label
    switch (rng.below(4)) {
      case 0: if (better.z_state != Verdict::valid) better.z_state = better.z_state == Verdict::invalid ? Verdict::abstain : Verdict::valid; break;
      case 1: if (better.z_trans != Verdict::valid) better.z_trans = better.z_trans == Verdict::invalid ? Verdict::abstain : Verdict::valid; break;
      case 2: if (better.z_faith != Verdict::valid) better.z_faith = better.z_faith == Verdict::invalid ? Verdict::abstain : Verdict::valid; break;
      default: if (!better.labels.empty()) better.labels.erase(better.labels.begin()); break;
    }
    CHECK(rule_score(better) >= rule_score(worse));
    const std::vector<Candidate> cs{cand(worse), cand(better)};
    const auto s = select(cs, RerankMode::rules);
    if (rule_score(better) > rule_score(worse)) CHECK(s.index == 1);
    else CHECK(s.index == 0);
  }
}
