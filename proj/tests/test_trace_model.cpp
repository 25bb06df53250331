#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "wmw/answer.hpp"
#include "wmw/io.hpp"
#include "wmw/parse.hpp"
#include "wmw/schema.hpp"
#include "wmw/units.hpp"

using namespace wmw;
using test::incline_trace;

TEST_CASE("gold trace round-trips through serialize and parse") {
  const Trace t = incline_trace();
  const std::string s = serialize(t);
  const Trace back = parse_trace(s);
  CHECK(back.same_fields(t));
  CHECK(serialize(back) == s);
}

TEST_CASE("markdown fences and preamble are stripped") {
  const Trace t = incline_trace();
  const std::string fenced = "Here is the trace:\n```json\n" + serialize(t) + "\n```\nDone.";
  CHECK(parse_trace(fenced).same_fields(parse_trace(serialize(t))));
}

TEST_CASE("parse errors carry kind and offset") {
  SUBCASE("no object") {
    try {
      parse_trace("The answer is B");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ParseErrorKind::no_object_found);
    }
  }
  SUBCASE("truncated") {
    try {
      const std::string text = "{\"state_0\": {\"objects\": [";
      parse_trace(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ParseErrorKind::truncated);
      // reported where the input ran out
      CHECK(e.offset() == 25);
    }
  }
  SUBCASE("first balanced object wins") {
    const Json j = extract_json_object("noise {\"a\": 1} then {\"b\": 2}");
    CHECK(j == Json{{"a", 1}});
  }
}

TEST_CASE("canonicalization maps aliases and unit spellings and is idempotent") {
  const Json raw = Json::parse(R"({"state0": {"objects": [{"name": "block", "mass": 2}], "relations": [],
      "forces": [], "variables": {"a": 1}}, "answer": {"value": "4.9", "unit": "m/s^2"}})");
  const Json c = canonicalize(raw);
  CHECK(c.contains("state_0"));
  CHECK(c["state_0"]["objects"][0]["attributes"]["mass"] == 2);
  CHECK(c["answer"]["unit"] == "m/s²");
  CHECK(canonicalize(c) == c);
}

TEST_CASE("schema: complete gold trace is valid in both modes") {
  const Trace t = incline_trace();
  CHECK(validate_schema(t, true).valid);
  CHECK(validate_schema(t, false).valid);
}

TEST_CASE("schema: missing transition is reported at its path") {
  Json doc = to_json(incline_trace());
  doc.erase("transition");
  for (bool strict : {true, false}) {
    const auto r = validate_document(doc, strict);
    CHECK_FALSE(r.valid);
    CHECK(std::any_of(r.errors.begin(), r.errors.end(), [](const SchemaError& e) { return e.path == "transition"; }));
  }
}

TEST_CASE("schema: relation type outside the vocabulary fails in both modes") {
  Json doc = to_json(incline_trace());
  doc["state_0"]["relations"][0]["type"] = "hovering";
  for (bool strict : {true, false}) {
    const auto r = validate_document(doc, strict);
    CHECK_FALSE(r.valid);
    CHECK(std::any_of(r.errors.begin(), r.errors.end(),
                      [](const SchemaError& e) { return e.path == "state_0.relations[0].type"; }));
  }
}

TEST_CASE("schema: unknown family fails") {
  Json doc = to_json(incline_trace());
  doc["scenario_family"] = "thermodynamic_cycle";
  CHECK_FALSE(validate_document(doc, true).valid);
  CHECK_FALSE(validate_document(doc, false).valid);
}

TEST_CASE("schema: valid iff no errors") {
  Json doc = to_json(incline_trace());
  doc["state_0"].erase("forces");
  const auto r = validate_document(doc, false);
  CHECK(r.valid == r.errors.empty());
}

TEST_CASE("schema: duplicate ids are found") {
  std::vector<Trace> ts{incline_trace("a"), incline_trace("b"), incline_trace("a")};
  CHECK(duplicate_ids(ts) == std::vector<std::string>{"a"});
}

TEST_CASE("shipped schema file matches the embedded schema") {
  std::ifstream in(std::string(WMW_DATA_DIR) + "/trace_schema.json");
  REQUIRE(in.good());
  const Json file = Json::parse(in);
  CHECK(file == trace_schema_document());
  CHECK(file.value("$schema", "") == "http://json-schema.org/draft-07/schema#");
}

TEST_CASE("normalize_answer by type") {
  CHECK(normalize_answer({std::string("(c)"), std::nullopt, std::nullopt}, AnswerType::multiple_choice).text == "C");
  // 490 cm/s² is 4.9 m/s².
  const auto n = normalize_answer({std::string("490 cm/s²"), std::nullopt, std::nullopt}, AnswerType::unit_bearing,
                                  "m/s²");
  CHECK(n.value == doctest::Approx(4.9).epsilon(1e-12));
  CHECK(n.unit == "m/s²");
  const auto sym = normalize_answer({std::string("  m  g   sin θ "), std::nullopt, std::nullopt}, AnswerType::symbolic);
  CHECK(sym.text == "m g sin θ");
}

TEST_CASE("normalize_answer errors") {
  CHECK_THROWS_AS(normalize_answer({std::string("about five"), std::nullopt, std::nullopt}, AnswerType::numeric),
                  NormalizationError);
  try {
    normalize_answer({4.9, std::string("furlongs"), std::nullopt}, AnswerType::unit_bearing, "m/s²");
    FAIL("expected NormalizationError");
  } catch (const NormalizationError& e) {
    CHECK(e.kind() == NormalizationErrorKind::unknown_unit);
  }
}

TEST_CASE("answers_equal uses 1% relative tolerance") {
  auto num = [](double v) { return normalize_answer({v, std::nullopt, std::nullopt}, AnswerType::numeric); };
  CHECK(answers_equal(num(4.9), num(4.9)));
  // |4.94 - 4.9| / 4.9 = 0.82%.
  CHECK(answers_equal(num(4.94), num(4.9)));
  CHECK_FALSE(answers_equal(num(4.96), num(4.9)));
  CHECK(answers_equal(normalize_answer({std::string("4.90"), std::nullopt, std::nullopt}, AnswerType::numeric),
                      num(4.9)));
  auto choice = [](const char* s) {
    return normalize_answer({std::string(s), std::nullopt, std::nullopt}, AnswerType::multiple_choice);
  };
  CHECK_FALSE(answers_equal(choice("B"), choice("C")));
  CHECK_THROWS_AS(answers_equal(choice("B"), num(1.0)), TypeMismatch);
}

TEST_CASE("zero reference uses the absolute tolerance") {
  CHECK(within_tolerance(5e-10, 0.0));
  CHECK_FALSE(within_tolerance(1e-8, 0.0));
}

TEST_CASE("unit conversion") {
  CHECK(*convert(490.0, "cm/s²", "m/s²") == doctest::Approx(4.9));
  CHECK(*convert(100.0, "°C", "°F") == doctest::Approx(212.0));
  CHECK(*convert(36.0, "km/h", "m/s") == doctest::Approx(10.0));
  CHECK_FALSE(convert(1.0, "m", "s").has_value());
  CHECK(canonical_unit("ohms") == "Ω");
  CHECK(unit_confusion_table().size() == 22);
}

TEST_CASE("jsonl io and digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(base64_encode("hello") == "aGVsbG8=");
  const std::vector<Json> rows{{{"a", 1}}, {{"b", 2}}};
  CHECK(to_jsonl(rows) == "{\"a\":1}\n{\"b\":2}\n");
}
