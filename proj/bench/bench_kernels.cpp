#include <benchmark/benchmark.h>

#include "wmw/generator.hpp"
#include "wmw/metrics.hpp"
#include "wmw/rng.hpp"
#include "wmw/verifier.hpp"

using namespace wmw;

namespace {

const std::vector<Trace>& bank() {
  static const std::vector<Trace> traces = generate_bank(2026, 200).traces;
  return traces;
}

std::vector<EvalRecord> bernoulli_records(int n) {
  Rng rng(7);
  std::vector<EvalRecord> out(static_cast<std::size_t>(n));
  for (auto& r : out) r.answer_correct = rng.chance(0.5);
  return out;
}

void BM_VerifyBatchSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(verify_batch_serial(bank(), true));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(bank().size()));
}

void BM_VerifyBatchParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(verify_batch(bank(), true));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(bank().size()));
}

void BM_BootstrapSerial(benchmark::State& state) {
  const auto recs = bernoulli_records(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci_serial(recs, Metric::answer_acc, 1000, 2026));
}

void BM_BootstrapParallel(benchmark::State& state) {
  const auto recs = bernoulli_records(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(recs, Metric::answer_acc, 1000, 2026));
}

void BM_GenerateBank(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(generate_bank(2026, 200));
}

}  // namespace

BENCHMARK(BM_VerifyBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyBatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Arg(400)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Arg(400)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateBank)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
