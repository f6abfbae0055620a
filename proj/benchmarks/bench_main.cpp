#include <benchmark/benchmark.h>

#include <random>

#include "cse/algo.hpp"
#include "cse/budget.hpp"
#include "cse/harness.hpp"
#include "cse/stats.hpp"

using namespace cse;

static void BM_Schedule(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    for (Variant v : {Variant::kCsws, Variant::kCsr, Variant::kCsh}) {
      benchmark::DoNotOptimize(schedule_for(v, n, 7));
    }
  }
}
BENCHMARK(BM_Schedule)->Arg(64)->Arg(4096)->Arg(1 << 20);

static void BM_EnumerateSets(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    std::size_t count = 0;
    for (const auto& q : enumerate_query_sets(n, 3)) count += q.size();
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_EnumerateSets)->Arg(20)->Arg(60);

static void BM_StatisticUpdate(benchmark::State& state) {
  const Statistic statistic = state.range(0) == 0 ? Statistic::empirical_mean() : Statistic::median();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ObservationVector obs{ObservationKind::kReal, std::vector<double>(4)};
  for (auto _ : state) {
    StatisticState s(statistic, 4);
    for (int t = 0; t < 256; ++t) {
      for (auto& x : obs.values) x = unit(rng);
      s.update(obs);
    }
    benchmark::DoNotOptimize(s.values());
  }
}
BENCHMARK(BM_StatisticUpdate)->Arg(0)->Arg(1);

static void BM_RunCse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  EnvironmentSpec spec;
  spec.n = n;
  spec.k = 4;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    spec.seed = ++seed;
    auto env = make_environment(spec);
    RunConfig config;
    config.budget = 20 * n;
    config.schedule = schedule_for(Variant::kCsh, n, 4);
    config.seed = seed;
    benchmark::DoNotOptimize(run_cse(config, *env));
  }
}
BENCHMARK(BM_RunCse)->Arg(50)->Arg(500)->Arg(5000);

static void BM_RunRoundRobin(benchmark::State& state) {
  EnvironmentSpec spec;
  spec.n = 50;
  spec.k = 2;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    spec.seed = ++seed;
    auto env = make_environment(spec);
    benchmark::DoNotOptimize(
        run_round_robin(1000, 50, 2, *env, Statistic::empirical_mean(), PartitionOrder::kShuffle, seed));
  }
}
BENCHMARK(BM_RunRoundRobin);

static void BM_RaceGrid(benchmark::State& state) {
  ExperimentGrid grid;
  grid.env.kind = EnvKind::kRace;
  grid.algorithms = {"csh", "rr", "sh"};
  grid.n_values = {20};
  grid.k_values = {4};
  grid.budgets = {300};
  grid.repetitions = 20;
  for (auto _ : state) benchmark::DoNotOptimize(run_grid(grid, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_RaceGrid)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_SufficientBudget(benchmark::State& state) {
  EnvironmentSpec spec;
  spec.n = 30;
  spec.k = 3;
  const auto profile = make_environment(spec)->latent_limits();
  const auto schedule = schedule_for(Variant::kCsws, 30, 3);
  const ArmId best = designated_best(spec);
  for (auto _ : state) benchmark::DoNotOptimize(sufficient_budget_z(schedule, profile, best));
}
BENCHMARK(BM_SufficientBudget);
BENCHMARK_MAIN();
