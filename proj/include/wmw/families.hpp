#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wmw/rng.hpp"
#include "wmw/trace.hpp"

namespace wmw {

struct VariableSpec {
  std::string key;
  std::string unit;
  double lo;
  double hi;
  int decimals = 2;
};

/// Everything the generator knows about one scenario family: canonical
/// inputs and their sampling ranges, the recomputation check, and the
/// text used to dress a trace. `variants` enumerates sub-cases such as
/// frictionless vs kinetic friction or series vs parallel.
struct FamilySpec {
  Family family;
  int variants = 1;
  std::function<std::vector<VariableSpec>(int variant)> inputs;
  std::string answer_key;
  std::string answer_unit;
  std::vector<std::string> rule_keywords;
  /// Derived quantities (state_1 new_variables); must contain answer_key.
  std::function<VariableMap(const VariableMap& in, int variant)> derive;
  /// Extra sampling constraints (e.g. mu < tan(theta)); may adjust inputs.
  std::function<void(VariableMap& in, int variant, Rng& rng)> constrain;
};

const FamilySpec& family_spec(Family f);

/// Per-family rule keywords, as shipped in data/rule_keywords.json.
const std::map<std::string, std::vector<std::string>>& default_rule_keywords();

/// The transition rule text the generator writes for a family (variant 0).
const std::string& canonical_rule(Family f);

/// Rounds to `digits` significant digits.
double round_significant(double x, int digits);

/// Recomputes the requested quantity from state_0 variables alone.
double recompute_answer(Family f, const VariableMap& inputs, int variant);

/// Builds a fully dressed gold trace from explicit inputs.
Trace build_trace(Family f, const VariableMap& inputs, int variant, std::string id);

/// Samples inputs for `f` from the family's ranges and builds the trace.
Trace generate_trace(Family f, Rng& rng, std::string id = {});

}  // namespace wmw
