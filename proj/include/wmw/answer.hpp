#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "wmw/trace.hpp"

namespace wmw {

/// Relative tolerance for numeric agreement everywhere in the pipeline.
inline constexpr double kRelativeTolerance = 0.01;
/// Used instead when the reference value is zero.
inline constexpr double kZeroAbsoluteTolerance = 1e-9;

/// |a - reference| within 1% of |reference|, or 1e-9 absolute when the
/// reference is zero. Used for gold comparisons where the reference is fixed.
bool within_tolerance(double a, double reference);

struct NormalizedAnswer {
  AnswerType type = AnswerType::numeric;
  std::string text;   // choice letter or whitespace-normalized symbol
  double value = 0.0; // numeric and unit-bearing answers
  std::string unit;   // canonical unit token after conversion

  bool operator==(const NormalizedAnswer&) const = default;
};

enum class NormalizationErrorKind { unparseable_number, unknown_unit };

class NormalizationError : public std::runtime_error {
 public:
  NormalizationError(NormalizationErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  NormalizationErrorKind kind() const noexcept { return kind_; }

 private:
  NormalizationErrorKind kind_;
};

class TypeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalizes by answer type. Unit-bearing values are converted to
/// `canonical_unit` when given; the unit may come from `answer.unit` or be
/// embedded in the value text ("490 cm/s²").
NormalizedAnswer normalize_answer(const Answer& answer, AnswerType type,
                                  std::string_view canonical_unit = {});

/// Numeric: |a - b| within 1% of max(|a|, |b|), 1e-9 absolute when either
/// side is zero, so the relation is symmetric.
/// Choices and symbols: exact. Throws TypeMismatch on different types.
bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b);

/// Rebuilds an Answer from a normalized one (used for idempotence checks).
Answer to_answer(const NormalizedAnswer& n);

}  // namespace wmw
