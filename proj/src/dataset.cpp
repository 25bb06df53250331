#include "wmw/dataset.hpp"

#include "wmw/io.hpp"

namespace wmw {

namespace {

constexpr Split kSplits[] = {Split::train, Split::val, Split::test};

void add_pair_files(Release& r) {
  r.files.emplace_back("preference_pairs_seed.jsonl", pairs_to_jsonl(r.pairs));
  for (Split s : kSplits) {
    const auto rows = export_dpo(r.pairs, s);
    r.files.emplace_back("dpo_" + std::string(to_string(s)) + ".jsonl", to_jsonl(rows));
  }
}

void count_pairs(Release& r) {
  r.stats.pair_count = static_cast<int>(r.pairs.size());
  r.stats.pair_label_counts.clear();
  r.stats.pair_partition_counts.clear();
  r.stats.split_pair_counts.clear();
  for (Split s : kSplits) r.stats.split_pair_counts[std::string(to_string(s))] = 0;
  for (const auto& p : r.pairs) {
    ++r.stats.pair_label_counts[std::string(to_string(p.label))];
    ++r.stats.pair_partition_counts[std::string(to_string(p.perturbation_family))];
    ++r.stats.split_pair_counts[std::string(to_string(p.split))];
  }
}

void seal(Release& r) {
  for (const auto& [name, bytes] : r.files) r.stats.checksums[name] = sha256_hex(bytes);
  r.files.emplace_back("generation_stats.json", r.stats.to_json().dump(2) + "\n");
}

}  // namespace

std::string pairs_to_jsonl(std::span<const PreferencePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += to_json(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<PreferencePair> read_pairs(const std::filesystem::path& path) {
  std::vector<PreferencePair> out;
  for (const auto& row : read_jsonl(path)) out.push_back(pair_from_json(row));
  return out;
}

Release build_release(std::uint64_t seed, int n, int per_trace) {
  Release r;
  Bank bank = generate_bank(seed, n);
  r.traces = std::move(bank.traces);
  r.stats = std::move(bank.stats);
  r.splits = assign_splits(r.traces, seed);
  r.pairs = build_pairs(r.traces, per_trace, seed);
  attach_pairs(r.splits, r.pairs);

  for (Split s : kSplits) r.stats.split_trace_counts[std::string(to_string(s))] = 0;
  for (const auto& [s, ids] : r.splits.trace_ids)
    r.stats.split_trace_counts[std::string(to_string(s))] = static_cast<int>(ids.size());
  count_pairs(r);

  r.files.emplace_back("trace_examples_seed.jsonl", traces_to_jsonl(r.traces));
  r.files.emplace_back("splits.json", r.splits.to_json().dump(2) + "\n");
  add_pair_files(r);
  seal(r);
  return r;
}

Release build_pair_release(std::vector<Trace> traces, int per_trace, std::uint64_t seed) {
  Release r;
  r.traces = std::move(traces);
  r.stats.seed = seed;
  r.stats.n = static_cast<int>(r.traces.size());
  for (const auto& t : r.traces) ++r.stats.family_counts[t.scenario_family];
  r.pairs = build_pairs(r.traces, per_trace, seed);
  count_pairs(r);
  add_pair_files(r);
  seal(r);
  return r;
}

void write_release(const Release& release, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, bytes] : release.files) write_file(dir / name, bytes);
}

}  // namespace wmw
