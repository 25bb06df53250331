#include <algorithm>
#include <cmath>

#include "wmw/metrics.hpp"
#include "wmw/rng.hpp"

namespace wmw {

namespace {

std::optional<double> resample_value(std::span<const EvalRecord> records, Metric m, std::uint64_t seed, int b,
                                     std::vector<std::size_t>& idx) {
  Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(b));
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(records.size()));
  return metric_value(records, idx, m);
}

std::optional<Interval> summarize(std::optional<double> point, std::vector<std::optional<double>>& draws) {
  if (!point) return std::nullopt;
  std::vector<double> v;
  v.reserve(draws.size());
  for (const auto& d : draws)
    if (d) v.push_back(*d);
  if (v.empty()) return Interval{*point, *point, *point};
  std::sort(v.begin(), v.end());
  return Interval{*point, percentile(v, 0.025), percentile(v, 0.975)};
}

}  // namespace

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<Interval> bootstrap_ci_serial(std::span<const EvalRecord> records, Metric m, int B,
                                            std::uint64_t seed) {
  if (records.empty() || B < 1) return std::nullopt;
  std::vector<std::optional<double>> draws(static_cast<std::size_t>(B));
  std::vector<std::size_t> idx(records.size());
  for (int b = 0; b < B; ++b) draws[static_cast<std::size_t>(b)] = resample_value(records, m, seed, b, idx);
  return summarize(metric_value(records, m), draws);
}

std::optional<Interval> bootstrap_ci(std::span<const EvalRecord> records, Metric m, int B, std::uint64_t seed) {
  if (records.empty() || B < 1) return std::nullopt;
  std::vector<std::optional<double>> draws(static_cast<std::size_t>(B));
#pragma omp parallel
  {
    std::vector<std::size_t> idx(records.size());
#pragma omp for schedule(static)
    for (int b = 0; b < B; ++b) draws[static_cast<std::size_t>(b)] = resample_value(records, m, seed, b, idx);
  }
  return summarize(metric_value(records, m), draws);
}

}  // namespace wmw
