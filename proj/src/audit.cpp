#include <algorithm>
#include <cmath>

#include "wmw/metrics.hpp"
#include "wmw/rng.hpp"

namespace wmw {

namespace {

/// Splits `total` into near-equal integer shares; the remainder goes to a
/// seeded choice of keys.
std::map<std::string, int> even_split(const std::vector<std::string>& keys, int total, Rng& rng) {
  std::map<std::string, int> out;
  const int k = static_cast<int>(keys.size());
  for (const auto& key : keys) out[key] = total / k;
  std::vector<std::string> order = keys;
  rng.shuffle(std::span<std::string>(order));
  for (int i = 0; i < total % k; ++i) ++out[order[static_cast<std::size_t>(i)]];
  return out;
}

/// Largest-remainder apportionment of `total` by `weights`, capped by
/// `capacity`; overflow is redistributed to keys with room.
std::map<std::string, int> apportion(const std::map<std::string, double>& weights,
                                     const std::map<std::string, int>& capacity, int total) {
  std::map<std::string, int> out;
  int remaining = total;
  std::map<std::string, double> live;
  for (const auto& [k, w] : weights)
    if (capacity.at(k) > 0 && w > 0) live[k] = w;
  while (remaining > 0 && !live.empty()) {
    double wsum = 0;
    for (const auto& [k, w] : live) wsum += w;
    std::vector<std::pair<double, std::string>> rema;
    int given = 0;
    for (const auto& [k, w] : live) {
      const double exact = remaining * w / wsum;
      const int room = capacity.at(k) - out[k];
      const int take = std::min(room, static_cast<int>(std::floor(exact)));
      out[k] += take;
      given += take;
      rema.emplace_back(exact - take, k);
    }
    remaining -= given;
    std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [r, k] : rema) {
      if (remaining == 0) break;
      if (out[k] < capacity.at(k)) {
        ++out[k];
        --remaining;
      }
    }
    for (auto it = live.begin(); it != live.end();)
      it = out[it->first] >= capacity.at(it->first) ? live.erase(it) : std::next(it);
    if (given == 0 && remaining > 0 && std::all_of(rema.begin(), rema.end(), [&](const auto& p) {
          return out[p.second] >= capacity.at(p.second);
        }))
      break;
  }
  return out;
}

/// Weighted sampling without replacement (exponential keys).
std::vector<std::size_t> weighted_pick(const std::vector<std::size_t>& items, const std::vector<double>& weights,
                                       int k, Rng& rng) {
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double u = std::max(rng.uniform(), 1e-300);
    keyed.emplace_back(std::log(u) / weights[i], items[i]);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (int i = 0; i < k && i < static_cast<int>(keyed.size()); ++i) out.push_back(keyed[static_cast<std::size_t>(i)].second);
  return out;
}

}  // namespace

const std::set<Label>& rare_labels() {
  static const std::set<Label> s{Label::temporal, Label::intervention, Label::unit_scale};
  return s;
}

Json to_json(const AuditItem& item) {
  const auto& c = item.candidate;
  return Json{{"id", c.id},
              {"family", c.family},
              {"model", c.model},
              {"predicted_label", c.predicted_label ? Json(to_string(*c.predicted_label)) : Json(nullptr)},
              {"gold_check", item.gold_check}};
}

std::vector<AuditItem> audit_sample(std::span<const AuditCandidate> pool, int n, int gold_checks,
                                    std::uint64_t seed) {
  if (n <= 0) return {};
  if (gold_checks > n) throw InsufficientRecords("more gold checks than sample slots");
  if (static_cast<int>(pool.size()) < n) throw InsufficientRecords("pool smaller than the requested sample");

  Rng rng(seed);
  std::map<std::string, double> family_share;
  std::map<std::string, std::vector<std::size_t>> by_model_gold, by_model_rest;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    family_share[pool[i].family] += 1.0;
    (pool[i].gold ? by_model_gold : by_model_rest)[pool[i].model].push_back(i);
  }
  std::vector<std::string> models;
  for (const auto& c : pool)
    if (std::find(models.begin(), models.end(), c.model) == models.end()) models.push_back(c.model);
  std::sort(models.begin(), models.end());

  const auto quota = even_split(models, n, rng);
  const auto gold_quota = even_split(models, gold_checks, rng);

  std::vector<AuditItem> out;
  for (const auto& model : models) {
    const int g = gold_quota.at(model);
    auto& golds = by_model_gold[model];
    if (static_cast<int>(golds.size()) < g)
      throw InsufficientRecords("model " + model + " has too few gold candidates");
    std::vector<std::size_t> gpick = golds;
    rng.shuffle(std::span<std::size_t>(gpick));
    gpick.resize(static_cast<std::size_t>(g));
    for (std::size_t i : gpick) out.push_back({pool[i], true});
    // Unused gold candidates stay available as ordinary items.
    std::vector<std::size_t> rest = by_model_rest[model];
    for (std::size_t i : golds)
      if (std::find(gpick.begin(), gpick.end(), i) == gpick.end()) rest.push_back(i);
    std::sort(rest.begin(), rest.end());

    const int want = quota.at(model) - g;
    if (static_cast<int>(rest.size()) < want) throw InsufficientRecords("model " + model + " has too few records");

    std::map<std::string, std::vector<std::size_t>> cells;
    for (std::size_t i : rest) cells[pool[i].family].push_back(i);
    std::map<std::string, int> capacity;
    std::map<std::string, double> weights;
    for (const auto& [fam, items] : cells) {
      capacity[fam] = static_cast<int>(items.size());
      weights[fam] = family_share[fam];
    }
    const auto fam_quota = apportion(weights, capacity, want);
    for (const auto& [fam, items] : cells) {
      const auto it = fam_quota.find(fam);
      if (it == fam_quota.end() || it->second == 0) continue;
      std::vector<double> w;
      for (std::size_t i : items)
        w.push_back(pool[i].predicted_label && rare_labels().contains(*pool[i].predicted_label) ? kRareOversample
                                                                                                : 1.0);
      for (std::size_t i : weighted_pick(items, w, it->second, rng)) out.push_back({pool[i], false});
    }
  }
  rng.shuffle(std::span<AuditItem>(out));
  return out;
}

}  // namespace wmw
