#include "wmw/tables.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>

namespace wmw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr auto kDirections = std::to_array<PhrasePair>({
    {"left", "right"},
    {"leftward", "rightward"},
    {"up", "down"},
    {"upward", "downward"},
    {"clockwise", "counterclockwise"},
    {"toward center", "away from center"},
    {"down the incline", "up the incline"},
    {"forward", "backward"},
    {"into the page", "out of the page"},
    {"compressed", "stretched"},
    {"into the surface", "away from the surface"},
    {"toward equilibrium", "away from equilibrium"},
    {"inward", "outward"},
    {"toward the pivot", "away from the pivot"},
    {"north", "south"},
    {"east", "west"},
    {"ascending", "descending"},
    {"toward the fulcrum", "away from the fulcrum"},
});

constexpr auto kSignWords = std::to_array<PhrasePair>({
    {"accelerates", "decelerates"},
    {"increases", "decreases"},
    {"increase", "decrease"},
    {"increasing", "decreasing"},
    {"rises", "falls"},
    {"speeds up", "slows down"},
    {"gains", "loses"},
});

constexpr auto kContradictions = std::to_array<PhrasePair>({
    {"above", "below"},
    {"contact", "separated"},
    {"on", "below"},
    {"on", "under"},
    {"left_of", "right_of"},
    {"inside", "contains"},
});

constexpr auto kRelationSwaps = std::to_array<PhrasePair>({
    {"on", "above"},
    {"above", "below"},
    {"below", "above"},
    {"under", "above"},
    {"contact", "separated"},
    {"separated", "contact"},
    {"left_of", "right_of"},
    {"right_of", "left_of"},
    {"inside", "contains"},
    {"contains", "inside"},
    {"attached", "separated"},
    {"aligned", "separated"},
    {"before", "after"},
    {"after", "before"},
});

const std::array<BoundRule, 20> kBounds = {{
    {{"coefficient_of_friction"}, 0, 2, false, ""},
    {{"spring_constant"}, 0, 1e9, true, "N/m"},
    {{"specific_heat"}, 0, 1e5, true, "J/(kg·K)"},
    {{"wavelength"}, 0, 1e7, true, "m"},
    {{"temperature"}, -273.15, kInf, false, "°C"},
    {{"speed", "velocity"}, 0, 3e8, false, "m/s"},
    {{"acceleration"}, 0, 1e4, false, "m/s²"},
    {{"angle"}, 0, 360, false, "deg"},
    {{"length", "height", "distance", "radius"}, 0, 1e7, false, "m"},
    {{"time"}, 0, 1e9, false, "s"},
    {{"force"}, 0, 1e9, false, "N"},
    {{"energy"}, 0, 1e12, false, "J"},
    {{"charge"}, -1e3, 1e3, false, "C"},
    {{"current"}, 0, 1e6, false, "A"},
    {{"resistance"}, 0, 1e9, false, "Ω"},
    {{"voltage"}, 0, 1e9, false, "V"},
    {{"frequency"}, 0, 1e12, false, "Hz"},
    {{"pressure"}, 0, 1e12, false, "Pa"},
    {{"density"}, 0, 1e6, true, "kg/m³"},
    {{"mass"}, 0, 1e6, false, "kg"},
}};

constexpr auto kPostMarkers = std::to_array<std::string_view>({
    "post-collision", "post collision", "after the collision", "after impact", "post-transition",
    "final state", "at the end",
});

constexpr auto kPreMarkers = std::to_array<std::string_view>({
    "pre-collision", "pre collision", "before the collision", "before impact", "pre-transition",
    "initial state", "at the start",
});

constexpr auto kPerturbationMarkers = std::to_array<std::string_view>({
    "[perturbed]", "[corrupted]", "<perturbation>", "??", "xxx",
});

constexpr auto kGeneric = std::to_array<std::string_view>({
    "ground", "surface", "incline", "wall", "air", "earth",
});

struct Token {
  std::size_t begin;
  std::size_t end;
  std::string text;
};

std::vector<Token> tokens_with_offsets(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t b = i;
    std::string t;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i])))
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++]))));
    if (!t.empty()) out.push_back({b, i, std::move(t)});
  }
  return out;
}

}  // namespace

std::span<const PhrasePair> direction_pairs() { return kDirections; }
std::span<const PhrasePair> sign_word_pairs() { return kSignWords; }
std::span<const PhrasePair> contradictory_relation_pairs() { return kContradictions; }

std::span<const PhrasePair> reversal_pairs() {
  static const auto merged = [] {
    std::vector<PhrasePair> v(kDirections.begin(), kDirections.end());
    v.insert(v.end(), kSignWords.begin(), kSignWords.end());
    return v;
  }();
  return merged;
}

std::optional<std::string_view> relation_swap(std::string_view type) {
  for (const auto& p : kRelationSwaps)
    if (p.a == type) return p.b;
  return std::nullopt;
}

std::optional<std::string_view> contradictory_partner(std::string_view type) {
  for (const auto& p : kContradictions) {
    if (p.a == type) return p.b;
    if (p.b == type) return p.a;
  }
  return std::nullopt;
}

std::span<const BoundRule> bound_rules() { return kBounds; }

const BoundRule* bound_rule_for(std::string_view key) {
  const std::string k = lower(key);
  for (const auto& r : kBounds)
    for (auto p : r.patterns)
      if (k.find(p) != std::string::npos) return &r;
  return nullptr;
}

std::span<const std::string_view> post_markers() { return kPostMarkers; }
std::span<const std::string_view> pre_markers() { return kPreMarkers; }
std::span<const std::string_view> perturbation_markers() { return kPerturbationMarkers; }
std::span<const std::string_view> generic_entities() { return kGeneric; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokens_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

std::vector<PhraseMatch> find_phrases(std::string_view text, std::span<const PhrasePair> table) {
  struct Candidate {
    std::vector<std::string> tokens;
    std::string_view phrase;
    std::string_view opposite;
  };
  std::vector<Candidate> cands;
  for (const auto& p : table) {
    cands.push_back({tokenize(p.a), p.a, p.b});
    cands.push_back({tokenize(p.b), p.b, p.a});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& x, const Candidate& y) { return x.tokens.size() > y.tokens.size(); });

  const auto toks = tokens_with_offsets(text);
  std::vector<PhraseMatch> out;
  std::size_t i = 0;
  while (i < toks.size()) {
    bool matched = false;
    for (const auto& c : cands) {
      const std::size_t k = c.tokens.size();
      if (k == 0 || i + k > toks.size()) continue;
      bool eq = true;
      for (std::size_t j = 0; j < k && eq; ++j) eq = toks[i + j].text == c.tokens[j];
      if (!eq) continue;
      out.push_back({toks[i].begin, toks[i + k - 1].end, c.phrase, c.opposite});
      i += k;
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  return out;
}

std::optional<std::string> replace_phrases(std::string_view text, std::span<const PhrasePair> table) {
  const auto matches = find_phrases(text, table);
  if (matches.empty()) return std::nullopt;
  std::string out;
  std::size_t pos = 0;
  for (const auto& m : matches) {
    out.append(text.substr(pos, m.begin - pos));
    out.append(m.opposite);
    pos = m.end;
  }
  out.append(text.substr(pos));
  return out;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
  const auto toks = tokenize(text);
  const auto want = tokenize(phrase);
  if (want.empty() || want.size() > toks.size()) return false;
  for (std::size_t i = 0; i + want.size() <= toks.size(); ++i)
    if (std::equal(want.begin(), want.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

}  // namespace wmw
