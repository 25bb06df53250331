#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wmw/generator.hpp"
#include "wmw/perturb.hpp"

namespace wmw {

inline constexpr int kDefaultPairsPerTrace = 16;

/// Everything one seeded release contains, before it touches disk.
struct Release {
  std::vector<Trace> traces;
  std::vector<PreferencePair> pairs;
  SplitsDocument splits;
  GenerationStats stats;
  /// File name -> exact bytes, in write order.
  std::vector<std::pair<std::string, std::string>> files;
};

/// generate_bank, assign_splits, build_pairs, DPO export and stats. The
/// checksums in the stats are digests of the bytes in `files`.
Release build_release(std::uint64_t seed, int n, int per_trace = kDefaultPairsPerTrace);

/// Pairs and DPO files only, for traces that already carry splits.
Release build_pair_release(std::vector<Trace> traces, int per_trace, std::uint64_t seed);

/// Writes every file of the release under `dir`, creating it if needed.
void write_release(const Release& release, const std::filesystem::path& dir);

std::string pairs_to_jsonl(std::span<const PreferencePair> pairs);
std::vector<PreferencePair> read_pairs(const std::filesystem::path& path);

}  // namespace wmw
