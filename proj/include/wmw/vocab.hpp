#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace wmw {

enum class Family {
  inclined_plane,
  projectile,
  collision,
  pulley,
  spring,
  circuit,
  fluid,
  thermal,
  free_fall,
  friction,
  circular_motion,
  wave,
  lever,
  buoyancy,
  optics,
  pendulum,
  em_induction,
};

inline constexpr std::size_t kFamilyCount = 17;
const std::array<Family, kFamilyCount>& all_families();
std::string_view to_string(Family f);
std::optional<Family> family_from_string(std::string_view s);

/// The fixed 14-type spatial relation vocabulary.
inline constexpr std::array<std::string_view, 14> kRelationTypes = {
    "on",       "under",   "above",  "below",    "contact", "separated", "left_of",
    "right_of", "inside",  "contains", "attached", "aligned", "before",   "after",
};
bool is_relation_type(std::string_view s);

/// The nine failure labels.
enum class Label {
  object,
  state,
  relation,
  force,
  transition,
  intervention,
  temporal,
  unit_scale,
  faithfulness,
};

inline constexpr std::size_t kLabelCount = 9;
const std::array<Label, kLabelCount>& all_labels();
std::string_view to_string(Label l);
std::optional<Label> label_from_string(std::string_view s);

enum class Verdict { valid, invalid, abstain };
std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

enum class Split { train, val, test };
std::string_view to_string(Split s);
std::optional<Split> split_from_string(std::string_view s);

enum class AnswerType { multiple_choice, numeric, symbolic, unit_bearing };
std::string_view to_string(AnswerType t);
std::optional<AnswerType> answer_type_from_string(std::string_view s);

}  // namespace wmw
