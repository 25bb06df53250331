#include <doctest.h>

#include <map>

#include "support.hpp"
#include "wmw/dataset.hpp"
#include "wmw/tables.hpp"

using namespace wmw;
using test::incline_trace;

TEST_CASE("direction phrases reverse token-wise") {
  CHECK(replace_phrases("down the incline", direction_pairs()) == std::string("up the incline"));
  CHECK(replace_phrases("moves rightward", direction_pairs()) == std::string("moves leftward"));
  CHECK_FALSE(replace_phrases("diagonal", direction_pairs()).has_value());
  // "speeds up" is a sign phrase, not a direction followed by garbage
  const auto r = replace_phrases("the cart speeds up", reversal_pairs());
  REQUIRE(r.has_value());
  CHECK(r->find("speeds down") == std::string::npos);
}

TEST_CASE("relation swap table") {
  CHECK(relation_swap("on") == std::string_view("above"));
  CHECK(contradictory_partner("above") == std::string_view("below"));
  CHECK(contradictory_relation_pairs().size() == 6);
}

TEST_CASE("reverse_effect_sign on the incline") {
  const Trace t = incline_trace();
  Rng rng(1);
  const auto res = apply_perturbation(t, *find_perturbation("reverse_effect_sign"), rng);
  REQUIRE(res.has_value());
  CHECK(res->trace.transition->effect.find("up the incline") != std::string::npos);
}

TEST_CASE("reverse_effect_sign with no directional language is a NoOp") {
  Trace t = incline_trace();
  t.transition->effect = "the block moves diagonal";
  test::refresh(t);
  Rng rng(1);
  CHECK_FALSE(apply_perturbation(t, *find_perturbation("reverse_effect_sign"), rng).has_value());
}

TEST_CASE("swap_relation turns on into above") {
  const Trace t = incline_trace();
  Rng rng(3);
  const auto* p = find_perturbation("swap_relation");
  const auto res = p->apply_at(t, "relations[0]", rng);
  REQUIRE(res.has_value());
  CHECK(res->trace.state_0->relations[0].type == "above");
  CHECK(t.state_0->relations[0].type == "on");  // the source is untouched
}

TEST_CASE("registry shape: 25 perturbations, 15 seen, 10 held out, all labels") {
  const auto reg = perturbation_registry();
  CHECK(reg.size() == 25);
  int seen = 0;
  std::set<Label> labels;
  std::set<std::string> names;
  for (const auto& p : reg) {
    seen += p.partition == Partition::seen;
    labels.insert(p.label);
    names.insert(p.name);
    CHECK_FALSE(p.footprint.empty());
  }
  CHECK(seen == 15);
  CHECK(labels.size() == kLabelCount);
  CHECK(names.size() == 25);
  CHECK(find_perturbation("no_such") == nullptr);
}

TEST_CASE("every application edits exactly its declared footprint") {
  const auto& bank = test::seed_bank();
  std::map<std::string, int> applied;
  for (std::size_t ti = 0; ti < bank.size(); ti += 5) {
    const Trace& t = bank[ti];
    for (const auto& p : perturbation_registry()) {
      const std::set<std::string> fp(p.footprint.begin(), p.footprint.end());
      for (const auto& site : p.sites(t)) {
        Rng rng(ti * 131 + applied[p.name]);
        const auto res = p.apply_at(t, site, rng);
        if (!res) continue;
        CAPTURE(p.name);
        CAPTURE(site);
        CHECK(test::field_diff(t, res->trace) == fp);
        CHECK(res->trace.document == to_json(res->trace));
        CHECK_FALSE(res->description.empty());
        ++applied[p.name];
      }
    }
  }
  // each perturbation fires somewhere in the sample; the synthetic bank is
  // all numeric, so choice flips get their own case below
  for (const auto& p : perturbation_registry()) {
    if (p.name == "flip_choice") continue;
    CAPTURE(p.name);
    CHECK(applied[p.name] > 0);
  }
}

TEST_CASE("flip_choice on a multiple-choice trace") {
  Trace t = incline_trace();
  t.metadata->answer_type = AnswerType::multiple_choice;
  t.metadata->options = {"2.45 m/s²", "4.9 m/s²", "9.8 m/s²"};
  t.answer->value = std::string("B");
  t.answer->unit.reset();
  test::refresh(t);
  const auto* p = find_perturbation("flip_choice");
  CHECK(p->sites(t) == std::vector<std::string>{"choice:A", "choice:C"});
  Rng rng(2);
  const auto res = apply_perturbation(t, *p, rng);
  REQUIRE(res.has_value());
  CHECK(scalar_text(res->trace.answer->value) != "B");
  CHECK(test::field_diff(t, res->trace) == std::set<std::string>{"answer.value"});
  CHECK(p->sites(incline_trace()).empty());
}

TEST_CASE("accepted detection labels") {
  CHECK(accepted_detection_labels(Label::force) == std::set<Label>{Label::force, Label::transition});
  CHECK(accepted_detection_labels(Label::intervention) == std::set<Label>{Label::transition, Label::intervention});
  CHECK(accepted_detection_labels(Label::object) == std::set<Label>{Label::object});
}

TEST_CASE("pairs follow their trace's split and train never sees held-out") {
  const auto& bank = test::seed_bank();
  const auto pairs = build_pairs(bank, 16, 2026);
  CHECK(pairs.size() == bank.size() * 16);
  std::map<std::string, Split> split_of;
  for (const auto& t : bank) split_of[t.id] = *t.metadata->split;
  std::set<std::string> ids;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> instances;
  for (const auto& p : pairs) {
    CHECK(p.split == split_of.at(p.source_trace_id));
    if (p.split == Split::train) CHECK(p.perturbation_family == Partition::seen);
    CHECK(ids.insert(p.pair_id).second);
    CHECK(instances[p.source_trace_id].insert({p.perturbation_name, p.site}).second);
    CHECK(p.chosen.id == p.source_trace_id);
    CHECK_FALSE(p.chosen.same_fields(p.rejected));
  }
  std::set<Partition> in_eval;
  for (const auto& p : pairs)
    if (p.split != Split::train) in_eval.insert(p.perturbation_family);
  CHECK(in_eval.size() == 2);
}

TEST_CASE("asking for more pairs than a trace supports throws") {
  std::vector<Trace> one{incline_trace()};
  one[0].metadata->split = Split::train;
  test::refresh(one[0]);
  CHECK_THROWS_AS(build_pairs(one, 500, 1), InsufficientPerturbations);
}

TEST_CASE("pair json round trip") {
  const auto& bank = test::seed_bank();
  const std::vector<Trace> few(bank.begin(), bank.begin() + 3);
  for (const auto& p : build_pairs(few, 4, 9)) {
    const PreferencePair q = pair_from_json(to_json(p));
    CHECK(q.pair_id == p.pair_id);
    CHECK(q.label == p.label);
    CHECK(q.perturbation_family == p.perturbation_family);
    CHECK(q.rejected.same_fields(p.rejected));
    CHECK(q.chosen.same_fields(p.chosen));
    CHECK(q.split == p.split);
  }
}

TEST_CASE("DPO export: completions are the trace fields, train has no held-out") {
  const auto& bank = test::seed_bank();
  const auto pairs = build_pairs(bank, 16, 2026);
  for (Split s : {Split::train, Split::val, Split::test}) {
    const auto rows = export_dpo(pairs, s);
    CHECK_FALSE(rows.empty());
    for (const auto& row : rows) {
      CHECK(row.contains("prompt"));
      const Json chosen = Json::parse(row.at("chosen").get<std::string>());
      const Json rejected = Json::parse(row.at("rejected").get<std::string>());
      CHECK(chosen.contains("state_0"));
      CHECK_FALSE(chosen.contains("metadata"));
      CHECK(chosen != rejected);
      if (s == Split::train) CHECK(row.at("perturbation_family") == "seen");
    }
  }
}

TEST_CASE("pair building is deterministic in the seed") {
  const auto& bank = test::seed_bank();
  const std::vector<Trace> few(bank.begin(), bank.begin() + 20);
  const auto a = pairs_to_jsonl(build_pairs(few, 8, 5));
  CHECK(a == pairs_to_jsonl(build_pairs(few, 8, 5)));
  CHECK(a != pairs_to_jsonl(build_pairs(few, 8, 6)));
}
