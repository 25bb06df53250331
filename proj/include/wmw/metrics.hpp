#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmw/perturb.hpp"
#include "wmw/prompts.hpp"
#include "wmw/verifier.hpp"

namespace wmw {

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class MissingCondition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EvalRecord {
  std::string example_id;
  std::string model;
  Condition condition = Condition::full_trace;
  std::string source = "synthetic";
  std::string family;
  bool parsed = true;
  std::optional<Answer> gold_answer;
  std::optional<Answer> model_answer;
  bool answer_correct = false;
  VerifierReport report;
  double latency_ms = 0.0;
};

/// Fills answer_correct by normalizing both answers; any normalization
/// failure or type mismatch counts as incorrect.
bool score_answer(const std::optional<Answer>& model, const std::optional<Answer>& gold, AnswerType type,
                  std::string_view canonical_unit);

/// A field's verdict for metric purposes. A schema failure counts as invalid
/// for every deeper field rather than as an abstention.
Verdict effective(const VerifierReport& r, Verdict field);

/// Trace-level verdict: invalid if any of state, transition, faithfulness is
/// invalid; otherwise abstain if any abstained; otherwise valid.
Verdict trace_verdict(const VerifierReport& r);

struct SourceBreakdown {
  int n = 0;
  double answer_acc = 0.0;
  std::optional<double> trace_valid;
  std::optional<double> hir_correct;
};

struct MetricsSummary {
  int n = 0;
  double answer_acc = 0.0;
  double parse_rate = 0.0;
  /// Validity fractions exclude abstentions from numerator and denominator;
  /// none when every record abstained.
  std::optional<double> state_acc;
  std::optional<double> trans_acc;
  std::optional<double> trace_ans_rate;
  std::optional<double> trace_valid;
  double hir_all = 0.0;
  std::optional<double> hir_correct;
  double abstention_rate = 0.0;
  double mean_latency_ms = 0.0;
  std::map<std::string, SourceBreakdown> per_source;
  std::map<std::string, std::pair<double, double>> ci;
};

Json to_json(const MetricsSummary& m);

/// Throws EmptyInput on an empty list.
MetricsSummary compute_metrics(std::span<const EvalRecord> records);

struct Gaps {
  double vsg = 0.0;
  double tg = 0.0;
};

/// Signed gaps in percentage points. Needs full_trace, gold_state_answer
/// and gold_trans_answer; throws MissingCondition otherwise.
Gaps compute_gaps(const std::map<Condition, double>& acc_by_condition);

/// Two-rater kappa, (po - pe) / (1 - pe), with pe taken from the pooled
/// marginals of both raters. 1 when pe reaches 1.
double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);

// ---- bootstrap ----

enum class Metric { answer_acc, state_acc, trans_acc, trace_ans, trace_valid, hir_all, hir_correct, abstention };
std::string_view to_string(Metric m);
std::optional<Metric> metric_from_string(std::string_view s);
const std::vector<Metric>& all_metrics();

/// Metric over a multiset of record indices (the resampling primitive).
/// Conditional metrics recompute numerator and denominator from the same
/// indices; none when the denominator is empty.
std::optional<double> metric_value(std::span<const EvalRecord> records, std::span<const std::size_t> idx, Metric m);
std::optional<double> metric_value(std::span<const EvalRecord> records, Metric m);

struct Interval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap (2.5 / 97.5, linear interpolation between order
/// statistics). Resample b draws from Rng::substream(seed, b), so the
/// parallel and serial versions agree bit for bit. Resamples where the
/// metric is undefined are dropped. nullopt when the point estimate is
/// undefined.
std::optional<Interval> bootstrap_ci(std::span<const EvalRecord> records, Metric m, int B, std::uint64_t seed);
std::optional<Interval> bootstrap_ci_serial(std::span<const EvalRecord> records, Metric m, int B,
                                            std::uint64_t seed);

/// Linear-interpolation percentile of sorted values, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

// ---- agreement ----

enum class EvidenceClass { primary, caveat, qualitative };
std::string_view to_string(EvidenceClass c);

/// F1 >= 0.70 and kappa >= 0.65: primary; F1 >= 0.50: caveat; else qualitative.
EvidenceClass classify_label(double f1, double kappa);

struct LabelAgreement {
  Label label = Label::state;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
  EvidenceClass evidence = EvidenceClass::qualitative;
};

/// Per-label agreement between verifier label sets and reference label sets
/// over the same items. Throws LengthMismatch.
std::vector<LabelAgreement> label_agreement(std::span<const std::set<Label>> predicted,
                                            std::span<const std::set<Label>> reference);

inline constexpr double kAnnotatorGate = 0.80;
/// Share of embedded gold checks an annotator marked correct.
bool annotator_passes(int correct_on_gold, int gold_total);

// ---- prescreen ----

inline constexpr double kFalsePositiveTarget = 0.05;
inline constexpr double kDetectionTarget = 0.60;

/// Labels whose violations the rule verifier is expected to catch.
const std::set<Label>& detectable_labels();

struct PrescreenReport {
  int gold_count = 0;
  int rejected_count = 0;
  std::map<Label, double> false_positive_rate;
  std::map<Label, std::optional<double>> detection_rate;
  std::map<Label, int> rejected_per_label;
  std::map<Partition, std::optional<double>> detection_by_partition;
  bool fp_pass = true;
  bool detection_pass = true;
};

Json to_json(const PrescreenReport& r);

/// False-positive rates on gold traces (verified against their own
/// metadata) and detection rates on rejected traces (verified against the
/// chosen trace's metadata).
PrescreenReport prescreen(std::span<const Trace> gold, std::span<const PreferencePair> rejected,
                          const VerifierConfig& config = {});

// ---- audit sampling ----

class InsufficientRecords : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AuditCandidate {
  std::string id;
  std::string family;
  std::string model;
  std::optional<Label> predicted_label;
  /// Known-correct trace eligible as an embedded attention check.
  bool gold = false;
};

struct AuditItem {
  AuditCandidate candidate;
  bool gold_check = false;
};

/// Labels oversampled in the audit, and by how much.
const std::set<Label>& rare_labels();
inline constexpr double kRareOversample = 2.0;

/// Stratified sample: equal per model, proportional by family inside each
/// model, rare predicted labels weighted x2, and `gold_checks` gold
/// candidates spread evenly over models. Output order is shuffled so gold
/// checks are not identifiable by position.
std::vector<AuditItem> audit_sample(std::span<const AuditCandidate> pool, int n, int gold_checks,
                                    std::uint64_t seed);

Json to_json(const AuditItem& item);

}  // namespace wmw
