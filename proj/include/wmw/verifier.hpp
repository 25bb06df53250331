#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmw/trace.hpp"

namespace wmw {

struct VerifierReport {
  Verdict z_schema = Verdict::valid;
  Verdict z_state = Verdict::valid;
  Verdict z_trans = Verdict::valid;
  Verdict z_ans = Verdict::valid;
  Verdict z_faith = Verdict::valid;
  std::set<Label> labels;
  std::vector<std::string> messages;
  std::vector<std::string> abstain_reasons;

  /// Trace validity as the metrics use it: state, transition and
  /// faithfulness all valid.
  bool valid() const {
    return z_state == Verdict::valid && z_trans == Verdict::valid && z_faith == Verdict::valid;
  }
  bool any_abstain() const {
    return z_state == Verdict::abstain || z_trans == Verdict::abstain || z_faith == Verdict::abstain;
  }
  bool any_invalid() const {
    return z_state == Verdict::invalid || z_trans == Verdict::invalid || z_faith == Verdict::invalid;
  }

  bool operator==(const VerifierReport&) const = default;
};

Json to_json(const VerifierReport& r);
VerifierReport report_from_json(const Json& j);

enum class Confidence { high, medium, low };
std::string_view to_string(Confidence c);
std::optional<Confidence> confidence_from_string(std::string_view s);

struct JudgeVerdict {
  std::set<Label> labels;
  std::map<std::string, std::string> field_errors;
  bool answer_trace_consistent = true;
  Confidence confidence = Confidence::high;
  std::string rationale;

  bool operator==(const JudgeVerdict&) const = default;
};

Json to_json(const JudgeVerdict& v);
JudgeVerdict judge_verdict_from_json(const Json& j);

struct CheckResult {
  Verdict verdict = Verdict::valid;
  std::set<Label> labels;
  std::vector<std::string> messages;
  std::vector<std::string> abstain_reasons;

  void fail(Label l, std::string message) {
    verdict = Verdict::invalid;
    labels.insert(l);
    messages.push_back(std::move(message));
  }
};

struct VerifierConfig {
  /// Per-family rule keywords; defaults to the shipped table.
  std::map<std::string, std::vector<std::string>> rule_keywords;
  /// Strict Draft-7 schema (used for gold data) or lenient field checks.
  bool strict_schema = false;

  VerifierConfig();
};

/// +1 / -1 from direction and trend keywords, nullopt when neither or both
/// sign families occur.
std::optional<int> extract_direction_sign(std::string_view text);

/// The five state checks. `gold` may be null, in which case the gold
/// comparison abstains.
CheckResult check_state(const State0& s0, const Metadata* gold);

/// Transition checks: rule keywords, force/acceleration sign, effect vs
/// predicted change, temporal markers, equation sanity. Abstains when the
/// question names friction, elasticity or air resistance and no assumption
/// covers it. `question` comes from the gold metadata when present.
CheckResult check_transition(const Trace& trace, const VerifierConfig& config, std::string_view question);

/// Answer against state_1.new_variables (the answer-trace check).
CheckResult check_faithfulness(const Trace& trace, const Metadata* gold);

/// Full pipeline. When `gold` is null the trace's own metadata is not
/// trusted as gold; gold-dependent checks abstain.
VerifierReport verify(const Trace& trace, const Metadata* gold, const VerifierConfig& config = {});

/// Union of labels and conservative field verdicts. A low-confidence or
/// absent judge leaves the rule report unchanged.
VerifierReport ensemble(const VerifierReport& rule, const std::optional<JudgeVerdict>& judge);

/// Batch verification, each trace against its own metadata when
/// `use_trace_metadata_as_gold`. The parallel version uses OpenMP; the serial
/// one is the reference implementation.
std::vector<VerifierReport> verify_batch(std::span<const Trace> traces, bool use_trace_metadata_as_gold,
                                         const VerifierConfig& config = {});
std::vector<VerifierReport> verify_batch_serial(std::span<const Trace> traces, bool use_trace_metadata_as_gold,
                                                const VerifierConfig& config = {});

}  // namespace wmw
