#include "wmw/vocab.hpp"

#include <algorithm>

namespace wmw {

namespace {

constexpr std::array<std::string_view, kFamilyCount> kFamilyNames = {
    "inclined_plane", "projectile", "collision",       "pulley", "spring",
    "circuit",        "fluid",      "thermal",         "free_fall", "friction",
    "circular_motion", "wave",      "lever",           "buoyancy", "optics",
    "pendulum",       "em_induction",
};

constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "object", "state", "relation", "force", "transition",
    "intervention", "temporal", "unit_scale", "faithfulness",
};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  auto it = std::find(names.begin(), names.end(), s);
  if (it == names.end()) return std::nullopt;
  return static_cast<Enum>(it - names.begin());
}

}  // namespace

const std::array<Family, kFamilyCount>& all_families() {
  static const auto families = [] {
    std::array<Family, kFamilyCount> out{};
    for (std::size_t i = 0; i < kFamilyCount; ++i) out[i] = static_cast<Family>(i);
    return out;
  }();
  return families;
}

std::string_view to_string(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

std::optional<Family> family_from_string(std::string_view s) {
  return lookup<Family>(kFamilyNames, s);
}

bool is_relation_type(std::string_view s) {
  return std::find(kRelationTypes.begin(), kRelationTypes.end(), s) != kRelationTypes.end();
}

const std::array<Label, kLabelCount>& all_labels() {
  static const auto labels = [] {
    std::array<Label, kLabelCount> out{};
    for (std::size_t i = 0; i < kLabelCount; ++i) out[i] = static_cast<Label>(i);
    return out;
  }();
  return labels;
}

std::string_view to_string(Label l) { return kLabelNames[static_cast<std::size_t>(l)]; }

std::optional<Label> label_from_string(std::string_view s) {
  if (s == "unit/scale" || s == "unit" || s == "scale") return Label::unit_scale;
  return lookup<Label>(kLabelNames, s);
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::invalid: return "invalid";
    case Verdict::abstain: return "abstain";
  }
  return "abstain";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "valid") return Verdict::valid;
  if (s == "invalid") return Verdict::invalid;
  if (s == "abstain") return Verdict::abstain;
  return std::nullopt;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

std::optional<Split> split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  return std::nullopt;
}

std::string_view to_string(AnswerType t) {
  switch (t) {
    case AnswerType::multiple_choice: return "multiple_choice";
    case AnswerType::numeric: return "numeric";
    case AnswerType::symbolic: return "symbolic";
    case AnswerType::unit_bearing: return "unit_bearing";
  }
  return "numeric";
}

std::optional<AnswerType> answer_type_from_string(std::string_view s) {
  if (s == "multiple_choice") return AnswerType::multiple_choice;
  if (s == "numeric") return AnswerType::numeric;
  if (s == "symbolic") return AnswerType::symbolic;
  if (s == "unit_bearing") return AnswerType::unit_bearing;
  return std::nullopt;
}

}  // namespace wmw
