#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmw/generator.hpp"
#include "wmw/rng.hpp"
#include "wmw/trace.hpp"

namespace wmw {

enum class Partition { seen, held_out };
std::string_view to_string(Partition p);
std::optional<Partition> partition_from_string(std::string_view s);

struct PerturbResult {
  Trace trace;
  std::string description;
};

/// One typed violation. A perturbation exposes the places it can act on
/// (`sites`), and `apply_at` edits a deep copy at one site. The footprint is
/// the exact set of "section.field" paths every application modifies.
struct Perturbation {
  std::string name;
  Label label;
  Partition partition;
  std::vector<std::string> footprint;
  std::function<std::vector<std::string>(const Trace&)> sites;
  std::function<std::optional<PerturbResult>(const Trace&, const std::string& site, Rng&)> apply_at;
};

/// All 25 registered perturbations, in a fixed order.
std::span<const Perturbation> perturbation_registry();
const Perturbation* find_perturbation(std::string_view name);

/// Applies `p` at a random applicable site. nullopt is the NoOp value: no
/// site, or the edit left every field unchanged.
std::optional<PerturbResult> apply_perturbation(const Trace& trace, const Perturbation& p, Rng& rng);

/// Labels that count as detecting a violation of type `label`. Force
/// reversals surface through the force/acceleration agreement check, and
/// transition-sign edits through the effect/prediction check.
std::set<Label> accepted_detection_labels(Label label);

struct PreferencePair {
  std::string pair_id;
  std::string source_trace_id;
  Trace chosen;
  Trace rejected;
  Label label = Label::state;
  std::string perturbation_name;
  Partition perturbation_family = Partition::seen;
  std::string site;
  std::string description;
  Split split = Split::train;
};

Json to_json(const PreferencePair& p);
PreferencePair pair_from_json(const Json& j);

class InsufficientPerturbations : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples `per_trace` distinct (perturbation, site) instances per trace,
/// round-robin over perturbation names in a seeded order. Traces whose
/// metadata.split is train draw only from seen perturbations.
std::vector<PreferencePair> build_pairs(std::span<const Trace> traces, int per_trace, std::uint64_t seed);

/// Records pair ids per split in the splits document.
void attach_pairs(SplitsDocument& doc, std::span<const PreferencePair> pairs);

/// One DPO record per pair in `split`: prompt messages, chosen and rejected
/// completions as compact JSON. Held-out pairs never reach the train export.
std::vector<Json> export_dpo(std::span<const PreferencePair> pairs, Split split);

}  // namespace wmw
