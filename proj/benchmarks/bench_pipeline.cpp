#include <benchmark/benchmark.h>

#include "m2m/clock.hpp"
#include "m2m/pairing.hpp"
#include "m2m/sim.hpp"
#include "m2m/stats.hpp"

namespace {

m2m::ScenarioConfig bench_config(std::size_t trials) {
  m2m::ScenarioConfig cfg;
  cfg.l_gen = m2m::DelayDist::constant(10 * m2m::kNanosPerMilli);
  cfg.l_network = m2m::fit_delay_dist(m2m::DelayKind::LogNormal, 45 * m2m::kNanosPerMilli, 30 * m2m::kNanosPerMilli);
  cfg.l_exec = m2m::DelayDist::constant(10 * m2m::kNanosPerMilli);
  cfg.l_follow = m2m::fit_delay_dist(m2m::DelayKind::LogNormal, 700 * m2m::kNanosPerMilli, 140 * m2m::kNanosPerMilli);
  cfg.trials = trials;
  return cfg;
}

void BM_Simulate(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(m2m::simulate(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000);

void BM_PairEvents(benchmark::State& state) {
  const auto sim = m2m::simulate(bench_config(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(m2m::pair_events(sim.op_log, sim.veh_log));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PairEvents)->Arg(1000)->Arg(100000);

void BM_Summarize(benchmark::State& state) {
  const auto sim = m2m::simulate(bench_config(static_cast<std::size_t>(state.range(0))));
  std::vector<m2m::Nanos> totals;
  for (const auto& t : sim.truth.trials) totals.push_back(t.true_total_ns);
  const m2m::Nanos thresholds[] = {m2m::kNanosPerSecond};
  for (auto _ : state) benchmark::DoNotOptimize(m2m::summarize(totals, thresholds));
}
BENCHMARK(BM_Summarize)->Arg(1000)->Arg(100000);

void BM_ClockError(benchmark::State& state) {
  const auto pair = m2m::ClockPair::preset(m2m::SyncMode::CoReferenced);
  m2m::Nanos t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m2m::sample_clock_error(pair.vehicle_clock, t, 7));
    t += 500 * m2m::kNanosPerMilli;
  }
}
BENCHMARK(BM_ClockError);

void BM_PresetCalibration(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(m2m::preset(m2m::Preset::DynAuto));
}
BENCHMARK(BM_PresetCalibration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
