#include <doctest.h>

#include "support.hpp"
#include "wmw/verifier.hpp"

using namespace wmw;
using test::incline_trace;

namespace {

VerifierReport check(Trace t) {
  test::refresh(t);
  return verify(t, &*t.metadata);
}

bool has(const VerifierReport& r, Label l) { return r.labels.contains(l); }

}  // namespace

TEST_CASE("gold incline trace is valid on every field") {
  const auto r = check(incline_trace());
  CHECK(r.z_schema == Verdict::valid);
  CHECK(r.z_state == Verdict::valid);
  CHECK(r.z_trans == Verdict::valid);
  CHECK(r.z_faith == Verdict::valid);
  CHECK(r.labels.empty());
  CHECK(r.valid());
}

TEST_CASE("a relation naming a missing object is an object failure") {
  Trace t = incline_trace();
  t.state_0->relations.push_back({"left_of", {"block", "cart2"}});
  const auto r = check(t);
  CHECK(r.z_state == Verdict::invalid);
  CHECK(has(r, Label::object));
}

TEST_CASE("above and below on the same ordered pair contradict") {
  Trace t = incline_trace();
  t.state_0->relations.push_back({"above", {"block", "incline"}});
  t.state_0->relations.push_back({"below", {"block", "incline"}});
  const auto r = check(t);
  CHECK(r.z_state == Verdict::invalid);
  CHECK(has(r, Label::relation));
}

TEST_CASE("above and below on reversed args is not a contradiction") {
  Trace t = incline_trace();
  t.state_0->relations.push_back({"above", {"block", "incline"}});
  t.state_0->relations.push_back({"below", {"incline", "block"}});
  CHECK_FALSE(has(check(t), Label::relation));
}

TEST_CASE("temperature below absolute zero is a state failure") {
  Trace t = incline_trace();
  t.state_0->variables["temperature"] = -300;
  const auto r = check(t);
  CHECK(r.z_state == Verdict::invalid);
  CHECK(has(r, Label::state));
}

TEST_CASE("upward gravity is a force failure") {
  Trace t = incline_trace();
  t.state_0->forces[0].direction = "upward";
  const auto r = check(t);
  CHECK(r.z_state == Verdict::invalid);
  CHECK(has(r, Label::force));
}

TEST_CASE("normal force into the surface is a force failure") {
  Trace t = incline_trace();
  t.state_0->forces[1].direction = "into the incline";
  CHECK(has(check(t), Label::force));
}

TEST_CASE("net force and effect in opposite directions is a transition failure") {
  Trace t = incline_trace();
  t.state_0->forces.push_back({"applied force", "block", "rightward", 3.0, "N"});
  t.transition->effect = "the block slides leftward";
  t.state_1->predicted_change = "the block moves leftward";
  const auto r = check(t);
  CHECK(r.z_trans == Verdict::invalid);
  CHECK(has(r, Label::transition));
}

TEST_CASE("effect reversed against the net force direction phrase") {
  Trace t = incline_trace();
  t.transition->effect = "the block accelerates up the incline at constant rate";
  const auto r = check(t);
  CHECK(r.z_trans == Verdict::invalid);
  CHECK(has(r, Label::transition));
}

TEST_CASE("effect and predicted change disagreeing in sign is an intervention failure") {
  Trace t = incline_trace();
  t.state_1->predicted_change = "the block speed decreases steadily";
  const auto r = check(t);
  CHECK(r.z_trans == Verdict::invalid);
  CHECK(has(r, Label::intervention));
}

TEST_CASE("unbalanced equation is a transition failure") {
  Trace t = incline_trace();
  t.transition->equation = "F = (m*g";
  const auto r = check(t);
  CHECK(r.z_trans == Verdict::invalid);
  CHECK(has(r, Label::transition));
}

TEST_CASE("rule that fits no family keyword is a transition failure") {
  Trace t = incline_trace();
  t.transition->rule = "Ohm's law across the resistor";
  CHECK(has(check(t), Label::transition));
}

TEST_CASE("post-transition language in state_0 is a temporal failure") {
  Trace t = incline_trace();
  t.state_0->assumptions.push_back("the block is at rest post-collision");
  const auto r = check(t);
  CHECK(r.z_trans == Verdict::invalid);
  CHECK(has(r, Label::temporal));
}

TEST_CASE("answer far from state_1 is a faithfulness failure") {
  Trace t = incline_trace();
  t.answer->value = 500.0;
  const auto r = check(t);
  CHECK(r.z_faith == Verdict::invalid);
  CHECK(has(r, Label::faithfulness));
}

TEST_CASE("answer matching state_1 only before conversion is a unit failure") {
  Trace t = incline_trace();
  t.answer->unit = "cm/s²";
  const auto r = check(t);
  CHECK(r.z_faith == Verdict::invalid);
  CHECK(has(r, Label::unit_scale));
}

TEST_CASE("answer in another unit that converts correctly is faithful") {
  Trace t = incline_trace();
  t.answer->value = 490.0;
  t.answer->unit = "cm/s²";
  CHECK(check(t).z_faith == Verdict::valid);
}

TEST_CASE("gold variable off by a unit factor is labelled unit_scale") {
  Trace t = incline_trace();
  t.state_0->variables["block_mass"] = 2000;
  CHECK(has(check(t), Label::unit_scale));
}

TEST_CASE("without gold the state check abstains") {
  const Trace t = incline_trace();
  const auto r = verify(t, nullptr);
  CHECK(r.z_state == Verdict::abstain);
  CHECK_FALSE(r.abstain_reasons.empty());
}

TEST_CASE("friction in the question without a friction assumption abstains") {
  Trace t = incline_trace();
  Metadata gold = *t.metadata;
  gold.question += " Ignore friction for now.";
  t.state_0->assumptions = {"the incline is rigid and fixed"};
  test::refresh(t);
  const auto r = verify(t, &gold);
  CHECK(r.z_trans == Verdict::abstain);
}

TEST_CASE("missing transition fails schema and counts as invalid downstream") {
  Trace t = incline_trace();
  t.transition.reset();
  test::refresh(t);
  const auto r = verify(t, &*t.metadata);
  CHECK(r.z_schema == Verdict::invalid);
  CHECK_FALSE(r.valid());
}

TEST_CASE("extract_direction_sign") {
  CHECK(extract_direction_sign("the cart accelerates rightward") == 1);
  CHECK(extract_direction_sign("speed decreases") == -1);
  CHECK(extract_direction_sign("moves leftward") == -1);
  CHECK(extract_direction_sign("upward") == 1);
  CHECK_FALSE(extract_direction_sign("diagonal").has_value());
  CHECK_FALSE(extract_direction_sign("accelerates leftward").has_value());
  CHECK_FALSE(extract_direction_sign("").has_value());
  // token based: "uprightness" is not "right"
  CHECK_FALSE(extract_direction_sign("uprightness").has_value());
}

TEST_CASE("ensemble rules") {
  VerifierReport rule = test::report_with(Verdict::valid, Verdict::valid, Verdict::valid);

  SUBCASE("absent or low-confidence judge changes nothing") {
    CHECK(ensemble(rule, std::nullopt) == rule);
    JudgeVerdict j;
    j.labels = {Label::force};
    j.confidence = Confidence::low;
    CHECK(ensemble(rule, j) == rule);
  }
  SUBCASE("labels are unioned and the owning field flagged") {
    rule.labels = {Label::state};
    JudgeVerdict j;
    j.labels = {Label::temporal};
    const auto out = ensemble(rule, j);
    CHECK(out.labels == std::set<Label>{Label::state, Label::temporal});
    CHECK(out.z_trans == Verdict::invalid);
    CHECK(out.z_state == Verdict::valid);
  }
  SUBCASE("field errors and inconsistency flag fields") {
    JudgeVerdict j;
    j.field_errors = {{"state_0", "wrong mass"}};
    j.answer_trace_consistent = false;
    const auto out = ensemble(rule, j);
    CHECK(out.z_state == Verdict::invalid);
    CHECK(out.z_faith == Verdict::invalid);
    CHECK(out.z_trans == Verdict::valid);
  }
  SUBCASE("a judge never clears a rule failure") {
    rule.z_trans = Verdict::invalid;
    JudgeVerdict j;
    CHECK(ensemble(rule, j).z_trans == Verdict::invalid);
  }
}

TEST_CASE("report json round trip") {
  VerifierReport r = test::report_with(Verdict::invalid, Verdict::abstain, Verdict::valid, 3);
  r.messages = {"m"};
  CHECK(report_from_json(to_json(r)) == r);
}

TEST_CASE("parallel batch equals serial batch") {
  const auto& bank = test::seed_bank();
  const auto par = verify_batch(bank, true);
  const auto ser = verify_batch_serial(bank, true);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i] == ser[i]);
}

TEST_CASE("every seeded gold trace verifies valid without abstention") {
  VerifierConfig strict;
  strict.strict_schema = true;
  int bad = 0;
  for (const auto& r : verify_batch(test::seed_bank(), true, strict)) bad += !r.valid() || r.any_abstain();
  CHECK(bad == 0);
}
