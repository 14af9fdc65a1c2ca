#include <benchmark/benchmark.h>

#include <filesystem>

#include "clusterplan/cost.hpp"
#include "clusterplan/scenario.hpp"
#include "clusterplan/simulation.hpp"
#include "clusterplan/workload.hpp"

namespace {

using namespace clusterplan;

const std::filesystem::path kScenarios = CLUSTERPLAN_SCENARIO_DIR;

const Scenario& lab() {
  static const Scenario s = load_scenario(kScenarios / "lab_workload.json");
  return s;
}

void BM_GenerateWorkload(benchmark::State& state) {
  const auto& params = std::get<WorkloadParams>(*lab().workload);
  for (auto _ : state) benchmark::DoNotOptimize(generate_workload(params));
}
BENCHMARK(BM_GenerateWorkload);

void BM_RunLabWorkload(benchmark::State& state) {
  const Scenario& s = lab();
  const auto jobs = generate_workload(std::get<WorkloadParams>(*s.workload));
  const auto mode = static_cast<SchedMode>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(*s.cluster, jobs, mode, s.horizon_min));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(jobs.size()));
}
BENCHMARK(BM_RunLabWorkload)
    ->Arg(static_cast<int>(SchedMode::Strict))
    ->Arg(static_cast<int>(SchedMode::Skip))
    ->Unit(benchmark::kMillisecond);

// A backlog of many pending jobs stresses the SKIP queue scan.
void BM_RunSaturated(benchmark::State& state) {
  const Scenario& s = lab();
  auto params = std::get<WorkloadParams>(*s.workload);
  params.mean_interarrival_min = 30;
  const auto jobs = generate_workload(params);
  const auto mode = static_cast<SchedMode>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(*s.cluster, jobs, mode, s.horizon_min));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(jobs.size()));
}
BENCHMARK(BM_RunSaturated)
    ->Arg(static_cast<int>(SchedMode::Strict))
    ->Arg(static_cast<int>(SchedMode::Skip))
    ->Unit(benchmark::kMillisecond);

void BM_Utilization(benchmark::State& state) {
  const Scenario& s = lab();
  const auto trace = run(*s.cluster, generate_workload(std::get<WorkloadParams>(*s.workload)),
                         s.mode, s.horizon_min);
  for (auto _ : state) benchmark::DoNotOptimize(utilization(trace));
}
BENCHMARK(BM_Utilization);

void BM_CumulativeSeries(benchmark::State& state) {
  const Scenario s = load_scenario(kScenarios / "flat_rate_costs.json");
  const auto usage = UsageProfile::from_hours(1843, 8);
  const int months = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cumulative_series(s.cost->onprem, s.cost->offerings, usage, months));
  }
}
BENCHMARK(BM_CumulativeSeries)->Arg(16)->Arg(120);

void BM_UsageSweep(benchmark::State& state) {
  const Scenario s = load_scenario(kScenarios / "cost_sweep.json");
  std::vector<double> fractions;
  for (int i = 0; i <= state.range(0); ++i) fractions.push_back(static_cast<double>(i) / state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(usage_sweep(s.cost->onprem, s.cost->offerings.front(), fractions, 8, 16));
  }
}
BENCHMARK(BM_UsageSweep)->Arg(12)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
