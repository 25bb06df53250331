#include "wmw/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wmw/answer.hpp"
#include "wmw/parse.hpp"
#include "wmw/rng.hpp"
#include "wmw/schema.hpp"

namespace wmw {

namespace {

int trace_variant(const Trace& t) {
  if (!t.metadata) return 0;
  const auto& d = t.metadata->diagram;
  if (d.is_object() && d.contains("variant") && d["variant"].is_number_integer()) return d["variant"].get<int>();
  return 0;
}

std::string bank_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "wmw-%04d", index);
  return buf;
}

}  // namespace

GateReport quality_gate(const Trace& trace) {
  GateReport g;

  const SchemaReport schema = validate_schema(trace, /*strict=*/true);
  g.gate1_schema = schema.valid;
  for (const auto& e : schema.errors) g.messages.push_back("gate1: " + e.path + ": " + e.message);

  const auto family = family_from_string(trace.scenario_family);
  if (!family || !trace.state_0 || !trace.answer) {
    g.messages.push_back("gate2: trace lacks family, state_0 or answer");
  } else {
    const auto& spec = family_spec(*family);
    const auto value = scalar_number(trace.answer->value);
    try {
      const double expected = recompute_answer(*family, trace.state_0->variables, trace_variant(trace));
      g.gate2_recompute = value && within_tolerance(*value, expected);
      if (!g.gate2_recompute)
        g.messages.push_back("gate2: recomputed " + spec.answer_key + " = " + Json(expected).dump() +
                             " disagrees with the answer");
    } catch (const std::out_of_range&) {
      g.messages.push_back("gate2: state_0.variables lack a canonical input of " + trace.scenario_family);
    }
  }

  if (!trace.metadata || !trace.state_0 || !trace.state_1) {
    g.messages.push_back("gate3: metadata, state_0 or state_1 missing");
  } else {
    const auto& m = *trace.metadata;
    bool ok = !m.parameter_keys.empty();
    for (const auto& key : m.parameter_keys) {
      if (key == m.answer_key) {
        if (!trace.state_1->new_variables.contains(key)) {
          ok = false;
          g.messages.push_back("gate3: answer key " + key + " absent from state_1.new_variables");
        }
        continue;
      }
      if (!trace.state_0->variables.contains(key)) {
        ok = false;
        g.messages.push_back("gate3: parameter " + key + " absent from state_0.variables");
      }
      if (m.question.find(key) == std::string::npos) {
        ok = false;
        g.messages.push_back("gate3: parameter " + key + " absent from the question text");
      }
    }
    if (std::find(m.parameter_keys.begin(), m.parameter_keys.end(), m.answer_key) == m.parameter_keys.end()) {
      ok = false;
      g.messages.push_back("gate3: answer key not listed in parameter_keys");
    }
    g.gate3_parameter_keys = ok;
  }
  return g;
}

Json GenerationStats::to_json() const {
  return Json{{"seed", seed},
              {"n", n},
              {"family_counts", family_counts},
              {"gate_failures", gate_failures},
              {"gate_repaired", gate_repaired},
              {"gate_regenerated", gate_regenerated},
              {"pair_count", pair_count},
              {"pair_label_counts", pair_label_counts},
              {"pair_partition_counts", pair_partition_counts},
              {"split_trace_counts", split_trace_counts},
              {"split_pair_counts", split_pair_counts},
              {"checksums", checksums}};
}

std::map<Family, int> allocate_families(std::uint64_t seed, int n) {
  const auto& fams = all_families();
  std::map<Family, int> counts;
  const int base = n / static_cast<int>(fams.size());
  for (Family f : fams) counts[f] = base;
  std::vector<Family> order(fams.begin(), fams.end());
  Rng rng = Rng::substream(seed, 0xA110C);
  rng.shuffle(std::span<Family>(order));
  const int rem = n % static_cast<int>(fams.size());
  for (int i = 0; i < rem; ++i) ++counts[order[static_cast<std::size_t>(i)]];
  return counts;
}

Bank generate_bank(std::uint64_t seed, int n) {
  if (n < static_cast<int>(kFamilyCount))
    throw std::invalid_argument("generate_bank needs n >= 17 to cover every family");

  Bank bank;
  bank.stats.seed = seed;
  bank.stats.n = n;

  std::vector<Family> slots;
  for (const auto& [f, c] : allocate_families(seed, n)) {
    slots.insert(slots.end(), static_cast<std::size_t>(c), f);
    bank.stats.family_counts[std::string(to_string(f))] = c;
  }
  Rng rng(seed);
  rng.shuffle(std::span<Family>(slots));

  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string id = bank_id(static_cast<int>(i) + 1);
    Trace t = generate_trace(slots[i], rng, id);
    GateReport g = quality_gate(t);
    if (!g.automated_pass()) {
      ++bank.stats.gate_failures;
      // Repair first: a canonicalization round trip fixes aliasing problems.
      Trace repaired = trace_from_json(canonicalize(to_json(t)));
      if (quality_gate(repaired).automated_pass()) {
        ++bank.stats.gate_repaired;
        t = std::move(repaired);
      } else {
        int attempt = 0;
        do {
          if (++attempt > kGateRetryBudget)
            throw GenerationExhausted("family " + std::string(to_string(slots[i])) + " failed quality gates " +
                                      std::to_string(kGateRetryBudget) + " times");
          t = generate_trace(slots[i], rng, id);
        } while (!quality_gate(t).automated_pass());
        ++bank.stats.gate_regenerated;
      }
    }
    bank.traces.push_back(std::move(t));
  }
  return bank;
}

Json SplitsDocument::to_json() const {
  Json traces = Json::object();
  Json pairs = Json::object();
  for (const auto& [s, ids] : trace_ids) traces[std::string(to_string(s))] = ids;
  for (const auto& [s, ids] : pair_ids) pairs[std::string(to_string(s))] = ids;
  return Json{{"seed", seed}, {"traces", traces}, {"pairs", pairs}};
}

SplitsDocument assign_splits(std::vector<Trace>& traces, std::uint64_t seed) {
  const std::size_t n = traces.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng::substream(seed, 0x5B117);
  rng.shuffle(std::span<std::size_t>(order));

  const auto n_train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));

  SplitsDocument doc;
  doc.seed = seed;
  for (Split s : {Split::train, Split::val, Split::test}) {
    doc.trace_ids[s];
    doc.pair_ids[s];
  }
  for (std::size_t rank = 0; rank < n; ++rank) {
    const Split s = rank < n_train ? Split::train : rank < n_train + n_val ? Split::val : Split::test;
    Trace& t = traces[order[rank]];
    if (!t.metadata) t.metadata = Metadata{};
    t.metadata->split = s;
    t.document = to_json(t);
  }
  // Listed in bank order so the document reads naturally.
  for (const auto& t : traces) doc.trace_ids[*t.metadata->split].push_back(t.id);
  return doc;
}

}  // namespace wmw
