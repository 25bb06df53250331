#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmw/families.hpp"
#include "wmw/trace.hpp"

namespace wmw {

struct GateReport {
  bool gate1_schema = false;
  bool gate2_recompute = false;
  bool gate3_parameter_keys = false;
  /// Human review. Recorded for the release notes, never set by code.
  bool gate4_human_review = false;
  std::vector<std::string> messages;

  bool automated_pass() const { return gate1_schema && gate2_recompute && gate3_parameter_keys; }
};

GateReport quality_gate(const Trace& trace);

class GenerationExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kGateRetryBudget = 50;

struct GenerationStats {
  std::uint64_t seed = 0;
  int n = 0;
  std::map<std::string, int> family_counts;
  int gate_failures = 0;     // traces that failed a gate on first build
  int gate_repaired = 0;     // of those, fixed by canonicalization alone
  int gate_regenerated = 0;  // of those, replaced with fresh parameters
  int pair_count = 0;
  std::map<std::string, int> pair_label_counts;
  std::map<std::string, int> pair_partition_counts;
  std::map<std::string, int> split_trace_counts;
  std::map<std::string, int> split_pair_counts;
  std::map<std::string, std::string> checksums;

  Json to_json() const;
};

/// Per-family trace counts: floor(n/17) each, remainder spread over a
/// seeded shuffle of the families.
std::map<Family, int> allocate_families(std::uint64_t seed, int n);

struct Bank {
  std::vector<Trace> traces;
  GenerationStats stats;
};

/// Generates n gate-passing traces. Requires n >= 17.
Bank generate_bank(std::uint64_t seed, int n);

struct SplitsDocument {
  std::uint64_t seed = 0;
  std::map<Split, std::vector<std::string>> trace_ids;
  std::map<Split, std::vector<std::string>> pair_ids;

  Json to_json() const;
};

/// 60/20/20 trace-level split drawn from the seed; writes metadata.split on
/// every trace. Runs before pairing so perturbation sampling can respect it.
SplitsDocument assign_splits(std::vector<Trace>& traces, std::uint64_t seed);

}  // namespace wmw
