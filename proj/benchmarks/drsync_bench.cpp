#include <benchmark/benchmark.h>

#include "drsync/analysis.hpp"
#include "drsync/net_sim.hpp"
#include "drsync/rng.hpp"
#include "drsync/scenario.hpp"
#include "drsync/workload.hpp"

namespace {

using namespace drsync;

void BM_AutocorrAll(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(rng.uniform_int(0, 50));
  for (auto _ : state) benchmark::DoNotOptimize(autocorr_all(x, n / 2));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_AutocorrAll)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_GenerateTrace(benchmark::State& state) {
  const auto profile = preset("mmorpg");
  for (auto _ : state) {
    auto trace = generate_trace(profile, static_cast<std::uint32_t>(state.range(0)), 60000, 7);
    state.counters["records"] = static_cast<double>(trace.records.size());
    benchmark::DoNotOptimize(trace);
  }
}
BENCHMARK(BM_GenerateTrace)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ComputeStats(benchmark::State& state) {
  const auto trace = generate_trace(preset("mmorpg"), 50, 600000, 7);
  for (auto _ : state) benchmark::DoNotOptimize(compute_stats(trace, Direction::ClientToServer));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.records.size()));
}
BENCHMARK(BM_ComputeStats)->Unit(benchmark::kMillisecond);

void BM_UnreliableRun(benchmark::State& state) {
  std::vector<SendRequest> sends;
  for (std::uint64_t i = 1; i <= 10000; ++i) sends.push_back({i, TimeMs{static_cast<std::int64_t>(i) * 10}});
  const ChannelConfig chan{100, 40, 0.1, 3};
  for (auto _ : state) benchmark::DoNotOptimize(unreliable_run(chan, {80, LatePolicy::DeliverLate}, sends));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_UnreliableRun);

void BM_RunSimulation(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.channel = {100, 40, 0.1, 0};
  cfg.rto_ms = 400;
  cfg.dejitter.playout_delay_ms = 80;
  cfg.transport = state.range(0) == 0 ? TransportKind::ReliableOrdered : TransportKind::UnreliableDR;
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg).summary.error_mean);
}
BENCHMARK(BM_RunSimulation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
