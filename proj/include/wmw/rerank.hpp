#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmw/verifier.hpp"

namespace wmw {

enum class RerankMode { rules, learned, majority };
std::string_view to_string(RerankMode m);
std::optional<RerankMode> rerank_mode_from_string(std::string_view s);

class EmptyCandidates : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RerankScore {
  double rule_score = 0.0;
  std::optional<double> judge_score;
  double majority_bonus = 0.0;
  double total = 0.0;
  std::map<std::string, double> components;
};

Json to_json(const RerankScore& s);

inline constexpr double kMajorityBonus = 10.0;

/// +1 schema, +2 each for state, transition and answer-trace when valid,
/// +0.5 per abstained field, -0.5 per failure label.
double rule_score(const VerifierReport& report);
/// Same sum with each term itemized.
std::map<std::string, double> rule_components(const VerifierReport& report);

/// 5.0 base, -1.0 per label, -1.5 when state or transition is flagged,
/// -2.0 when answer and trace disagree. Not floored.
double judge_score(const JudgeVerdict& verdict);

struct Candidate {
  Trace trace;
  VerifierReport report;
  std::optional<JudgeVerdict> judge;
  /// Canonical answer text used for majority voting; empty when the sample
  /// had no usable answer.
  std::string answer_key;
};

struct Selection {
  std::size_t index = 0;
  std::vector<RerankScore> scores;
};

/// Argmax of the total score, lowest index on ties. Learned mode adds the
/// judge score when present; majority mode adds the bonus to every
/// candidate sharing the modal answer (ties between modes go to the answer
/// seen first).
Selection select(std::span<const Candidate> candidates, RerankMode mode);

/// Majority key for an answer: normalized to the canonical unit when
/// possible, raw text otherwise.
std::string answer_vote_key(const std::optional<Answer>& a, AnswerType type, std::string_view canonical_unit);

}  // namespace wmw
