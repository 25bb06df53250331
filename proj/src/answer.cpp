#include "wmw/answer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "wmw/units.hpp"

namespace wmw {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string choice_letter(const std::string& raw) {
  std::string up;
  for (unsigned char c : raw) up.push_back(static_cast<char>(std::toupper(c)));
  for (const char* prefix : {"OPTION", "ANSWER", "CHOICE"}) {
    auto pos = up.find(prefix);
    if (pos != std::string::npos) up.erase(pos, std::string(prefix).size());
  }
  for (std::size_t i = 0; i < up.size(); ++i) {
    const char c = up[i];
    if (c < 'A' || c > 'Z') continue;
    const bool prev_letter = i > 0 && std::isalpha(static_cast<unsigned char>(up[i - 1]));
    const bool next_letter = i + 1 < up.size() && std::isalpha(static_cast<unsigned char>(up[i + 1]));
    if (!prev_letter && !next_letter) return std::string(1, c);
  }
  throw NormalizationError(NormalizationErrorKind::unparseable_number,
                           "no choice letter in '" + raw + "'");
}

struct NumberWithUnit {
  double value;
  std::string unit;
};

NumberWithUnit split_number(const std::string& raw) {
  const std::string text = trim(raw);
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(v))
    throw NormalizationError(NormalizationErrorKind::unparseable_number,
                             "cannot parse a number from '" + raw + "'");
  return {v, trim(std::string_view(end))};
}

}  // namespace

bool within_tolerance(double a, double reference) {
  if (reference == 0.0) return std::abs(a) <= kZeroAbsoluteTolerance;
  return std::abs(a - reference) <= kRelativeTolerance * std::abs(reference);
}

NormalizedAnswer normalize_answer(const Answer& answer, AnswerType type, std::string_view canonical) {
  NormalizedAnswer out;
  out.type = type;
  switch (type) {
    case AnswerType::multiple_choice:
      out.text = choice_letter(scalar_text(answer.value));
      return out;
    case AnswerType::symbolic:
      out.text = collapse_whitespace(scalar_text(answer.value));
      if (out.text.empty())
        throw NormalizationError(NormalizationErrorKind::unparseable_number, "empty symbolic answer");
      return out;
    case AnswerType::numeric:
    case AnswerType::unit_bearing:
      break;
  }

  NumberWithUnit parsed{};
  if (const double* d = std::get_if<double>(&answer.value)) parsed = {*d, {}};
  else parsed = split_number(std::get<std::string>(answer.value));
  std::string unit = parsed.unit;
  if (unit.empty() && answer.unit) unit = trim(*answer.unit);

  if (unit.empty()) {
    out.value = parsed.value;
    out.unit = std::string(canonical);
    return out;
  }
  auto token = canonical_unit(unit);
  if (!token)
    throw NormalizationError(NormalizationErrorKind::unknown_unit, "unknown unit '" + unit + "'");
  if (canonical.empty()) {
    out.value = parsed.value;
    out.unit = *token;
    return out;
  }
  auto converted = convert(parsed.value, *token, canonical);
  if (!converted)
    throw NormalizationError(NormalizationErrorKind::unknown_unit,
                             "unit '" + *token + "' is not convertible to '" + std::string(canonical) + "'");
  out.value = *converted;
  out.unit = *canonical_unit(canonical);
  return out;
}

bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b) {
  const bool a_num = a.type == AnswerType::numeric || a.type == AnswerType::unit_bearing;
  const bool b_num = b.type == AnswerType::numeric || b.type == AnswerType::unit_bearing;
  if (a.type != b.type && !(a_num && b_num))
    throw TypeMismatch("cannot compare " + std::string(to_string(a.type)) + " with " +
                       std::string(to_string(b.type)));
  if (!a_num) return a.text == b.text;
  if (!a.unit.empty() && !b.unit.empty() && a.unit != b.unit) {
    auto converted = convert(a.value, a.unit, b.unit);
    if (!converted) return false;
    NormalizedAnswer tmp = a;
    tmp.value = *converted;
    tmp.unit = b.unit;
    return answers_equal(tmp, b);
  }
  const double scale = std::max(std::abs(a.value), std::abs(b.value));
  if (a.value == 0.0 || b.value == 0.0) return std::abs(a.value - b.value) <= kZeroAbsoluteTolerance;
  return std::abs(a.value - b.value) <= kRelativeTolerance * scale;
}

Answer to_answer(const NormalizedAnswer& n) {
  Answer a;
  if (n.type == AnswerType::numeric || n.type == AnswerType::unit_bearing) {
    a.value = n.value;
    if (!n.unit.empty()) a.unit = n.unit;
  } else {
    a.value = n.text;
  }
  return a;
}

}  // namespace wmw
