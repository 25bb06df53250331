#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmw {

struct PhrasePair {
  std::string_view a;
  std::string_view b;
};

/// Opposite-direction phrases (18 pairs). Matching is token based, so "up"
/// never fires inside "upward", and longer phrases win over their prefixes.
std::span<const PhrasePair> direction_pairs();

/// Sign-bearing verbs and their reversals (accelerates/decelerates, ...).
std::span<const PhrasePair> sign_word_pairs();

/// Direction phrases and sign words together, for reversing a sentence in
/// one pass ("speeds up" must not become "speeds down").
std::span<const PhrasePair> reversal_pairs();

/// The six contradictory relation pairs, checked on the same ordered args.
std::span<const PhrasePair> contradictory_relation_pairs();

/// Relation substitution used by swap_relation ("on" -> "above", ...).
std::optional<std::string_view> relation_swap(std::string_view type);

/// Partner that contradicts `type`, if any.
std::optional<std::string_view> contradictory_partner(std::string_view type);

struct BoundRule {
  std::vector<std::string_view> patterns;  // any substring of the key
  double lo;
  double hi;
  bool lo_open = false;
  std::string_view unit;
};

/// The 20 variable-bound rules; the first rule whose pattern occurs in the
/// lower-cased key applies.
std::span<const BoundRule> bound_rules();
const BoundRule* bound_rule_for(std::string_view key);

/// Post-transition language that must not appear in state_0 and
/// pre-transition language that must not appear in state_1.
std::span<const std::string_view> post_markers();
std::span<const std::string_view> pre_markers();

/// Tokens the perturbation engine may leave in equations.
std::span<const std::string_view> perturbation_markers();

/// Entity names accepted without an object entry.
std::span<const std::string_view> generic_entities();

/// Lower-cased alphanumeric tokens ("the cart's speed" -> the, cart, s, speed).
std::vector<std::string> tokenize(std::string_view text);

struct PhraseMatch {
  std::size_t begin;  // byte offsets into the original text
  std::size_t end;
  std::string_view phrase;
  std::string_view opposite;
};

/// Non-overlapping occurrences of table phrases, longest first at each token.
std::vector<PhraseMatch> find_phrases(std::string_view text, std::span<const PhrasePair> table);

/// Replaces every table phrase with its opposite; nullopt when none occurs.
std::optional<std::string> replace_phrases(std::string_view text, std::span<const PhrasePair> table);

bool contains_phrase(std::string_view text, std::string_view phrase);

std::string lower(std::string_view s);

}  // namespace wmw
