#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "wmw/dataset.hpp"
#include "wmw/io.hpp"
#include "wmw/schema.hpp"
#include "wmw/tables.hpp"

using namespace wmw;
using test::incline_trace;

namespace {
constexpr double kPi = std::numbers::pi;
double rad(double deg) { return deg * kPi / 180.0; }
double answer_of(const Trace& t) { return *scalar_number(t.answer->value); }
}  // namespace

TEST_CASE("inclined plane: a = g sin(theta)") {
  const Trace t = incline_trace();
  CHECK(answer_of(t) == doctest::Approx(9.8 * 0.5));
  CHECK(*t.answer->unit == "m/s²");
  CHECK(lower(t.transition->rule).find("newton") != std::string::npos);
  CHECK(lower(t.transition->rule).find("second law") != std::string::npos);
}

TEST_CASE("family formulas against hand computation") {
  auto ans = [](Family f, VariableMap in, int variant = 0) { return recompute_answer(f, in, variant); };
  CHECK(ans(Family::wave, {{"frequency", 2}, {"wavelength", 3}}) == doctest::Approx(6.0));
  CHECK(ans(Family::free_fall, {{"fall_time", 0}, {"gravitational_acceleration", 9.8}}) == doctest::Approx(0.0));
  CHECK(ans(Family::free_fall, {{"fall_time", 2}, {"gravitational_acceleration", 9.8}}) == doctest::Approx(19.6));
  CHECK(ans(Family::inclined_plane,
            {{"incline_angle", 30}, {"block_mass", 2}, {"gravitational_acceleration", 9.8},
             {"coefficient_of_friction", 0.2}},
            1) == doctest::Approx(9.8 * (std::sin(rad(30)) - 0.2 * std::cos(rad(30)))));
  CHECK(ans(Family::projectile, {{"launch_speed", 20}, {"launch_angle", 30}, {"gravitational_acceleration", 9.8}}) ==
        doctest::Approx(400 * std::sin(rad(60)) / 9.8));
  // Perfectly inelastic: (m1 v1) / (m1 + m2).
  CHECK(ans(Family::collision, {{"mass_1", 2}, {"velocity_1", 3}, {"mass_2", 1}}, 0) == doctest::Approx(2.0));
  CHECK(ans(Family::pulley, {{"mass_1", 3}, {"mass_2", 1}, {"gravitational_acceleration", 9.8}}) ==
        doctest::Approx(2 * 9.8 / 4));
  CHECK(ans(Family::spring, {{"spring_constant", 100}, {"mass", 4}, {"compression_distance", 0.1}}) ==
        doctest::Approx(5.0));
  CHECK(ans(Family::circuit, {{"voltage", 12}, {"resistance_1", 2}, {"resistance_2", 4}}, 0) == doctest::Approx(2.0));
  CHECK(ans(Family::circuit, {{"voltage", 12}, {"resistance_1", 2}, {"resistance_2", 4}}, 1) ==
        doctest::Approx(12.0 / (8.0 / 6.0)));
  CHECK(ans(Family::fluid, {{"fluid_density", 1000}, {"depth", 2}, {"gravitational_acceleration", 9.8}}) ==
        doctest::Approx(19600));
  CHECK(ans(Family::thermal, {{"mass", 2}, {"specific_heat", 4000}, {"temperature_change", 10}}) ==
        doctest::Approx(80000));
  CHECK(ans(Family::friction, {{"coefficient_of_friction", 0.5}, {"mass", 2}, {"gravitational_acceleration", 9.8}}) ==
        doctest::Approx(9.8));
  CHECK(ans(Family::circular_motion, {{"speed", 4}, {"radius", 2}}) == doctest::Approx(8.0));
  CHECK(ans(Family::lever, {{"mass_1", 4}, {"distance_1", 1}, {"mass_2", 2}}) == doctest::Approx(2.0));
  CHECK(ans(Family::buoyancy, {{"fluid_density", 1000}, {"submerged_volume", 0.01}, {"gravitational_acceleration", 9.8}}) ==
        doctest::Approx(98.0));
  // 1/f = 1/do + 1/di, f = 0.1, do = 0.3 -> di = 0.15.
  CHECK(ans(Family::optics, {{"focal_length", 0.1}, {"object_distance", 0.3}}) == doctest::Approx(0.15));
  CHECK(ans(Family::pendulum, {{"pendulum_length", 9.8 / (4 * kPi * kPi)}, {"gravitational_acceleration", 9.8}}) ==
        doctest::Approx(1.0));
  // EMF = -N dPhi/dt.
  CHECK(ans(Family::em_induction, {{"coil_turns", 100}, {"magnetic_flux_change", -0.2}, {"time_interval", 0.5}}) ==
        doctest::Approx(40.0));
}

TEST_CASE("every family generates a gate-passing trace with keywords") {
  for (Family f : all_families()) {
    CAPTURE(to_string(f));
    const auto& spec = family_spec(f);
    CHECK_FALSE(spec.rule_keywords.empty());
    for (std::uint64_t s = 0; s < 5; ++s) {
      Rng rng(s);
      const Trace t = generate_trace(f, rng, "x");
      const GateReport g = quality_gate(t);
      CHECK(g.automated_pass());
      CHECK_FALSE(g.gate4_human_review);
      CHECK_FALSE(t.metadata->question.empty());
      CHECK_FALSE(t.state_0->assumptions.empty());
      CHECK_FALSE(t.metadata->parameter_keys.empty());
    }
  }
}

TEST_CASE("gate 2 catches a corrupted answer") {
  Trace t = incline_trace();
  t.answer->value = 9.9;
  test::refresh(t);
  const GateReport g = quality_gate(t);
  CHECK(g.gate1_schema);
  CHECK_FALSE(g.gate2_recompute);
}

TEST_CASE("gate 3 catches renamed variables") {
  Trace t = incline_trace();
  VariableMap renamed;
  for (const auto& [k, v] : t.state_0->variables) renamed["x_" + k] = v;
  t.state_0->variables = renamed;
  test::refresh(t);
  CHECK_FALSE(quality_gate(t).gate3_parameter_keys);
}

TEST_CASE("family allocation covers every family and sums to n") {
  for (auto [seed, n] : {std::pair<std::uint64_t, int>{2026, 200}, {7, 34}, {1, 17}, {9, 1000}}) {
    const auto alloc = allocate_families(seed, n);
    int sum = 0;
    for (const auto& [f, c] : alloc) {
      CHECK(c >= 1);
      sum += c;
    }
    CHECK(alloc.size() == kFamilyCount);
    CHECK(sum == n);
  }
}

TEST_CASE("bank of 34 has at least one trace per family") {
  const Bank b = generate_bank(7, 34);
  CHECK(b.traces.size() == 34);
  std::map<std::string, int> count;
  for (const auto& t : b.traces) ++count[t.scenario_family];
  CHECK(count.size() == kFamilyCount);
  CHECK(duplicate_ids(b.traces).empty());
}

TEST_CASE("generate_bank rejects n below the family count") { CHECK_THROWS(generate_bank(1, 16)); }

TEST_CASE("splits are 60/20/20 and partition the bank") {
  std::vector<Trace> b = generate_bank(2026, 200).traces;
  const SplitsDocument d = assign_splits(b, 2026);
  CHECK(d.trace_ids.at(Split::train).size() == 120);
  CHECK(d.trace_ids.at(Split::val).size() == 40);
  CHECK(d.trace_ids.at(Split::test).size() == 40);
  std::set<std::string> seen;
  for (const auto& [s, ids] : d.trace_ids)
    for (const auto& id : ids) CHECK(seen.insert(id).second);
  CHECK(seen.size() == 200);
  for (const auto& t : b) CHECK(t.metadata->split.has_value());
}

TEST_CASE("release checksums are digests of the emitted bytes") {
  const Release r = build_release(11, 34, 4);
  std::map<std::string, std::string> files(r.files.begin(), r.files.end());
  for (const auto& [name, digest] : r.stats.checksums) CHECK(sha256_hex(files.at(name)) == digest);
  CHECK(r.stats.checksums.size() == 6);
  CHECK(files.contains("generation_stats.json"));
  int total = 0;
  for (const auto& [f, c] : r.stats.family_counts) total += c;
  CHECK(total == 34);
  CHECK(r.stats.pair_count == 34 * 4);
}
