// Microbenchmarks for the hot paths: vote-count combinatorics, risk
// evaluation, the three solvers and the simulator. Run manually, e.g.
//   build/benchmarks/core_benchmarks --benchmark_min_time=0.2

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "secretballot/monte_carlo.hpp"
#include "secretballot/rng.hpp"
#include "secretballot/sequential_dp.hpp"
#include "secretballot/team_problem.hpp"
#include "secretballot/threshold_optimizer.hpp"

using namespace secretballot;

namespace {

LikelihoodModel model_for(int which) {
  return which == 0 ? LikelihoodModel::gaussian_shift(0.0, 1.0, 1.0)
                    : LikelihoodModel::exponential_scale(1.0, 2.0);
}

std::vector<ErrorPair> random_pairs(int n) {
  std::vector<ErrorPair> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pairs.push_back({0.05 + 0.6 * uniform_draw(11, 2 * i),
                     0.05 + 0.6 * uniform_draw(11, 2 * i + 1)});
  }
  return pairs;
}

void BM_VoteCountPmf(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> probs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) probs[static_cast<std::size_t>(i)] = uniform_draw(3, i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(poisson_binomial_pmf(probs));
  }
}
BENCHMARK(BM_VoteCountPmf)->RangeMultiplier(4)->Range(4, 256);

void BM_GlobalErrorRates(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<ErrorPair> pairs = random_pairs(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(global_error_rates(pairs, (n + 1) / 2));
  }
}
BENCHMARK(BM_GlobalErrorRates)->RangeMultiplier(4)->Range(4, 256);

void BM_BayesRisk(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TeamProblem problem(0.6, 1.0, 2.0, model_for(0), n, (n + 1) / 2);
  std::vector<double> thresholds(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    thresholds[static_cast<std::size_t>(i)] = 0.2 + 0.1 * i;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(bayes_risk(problem, thresholds));
  }
}
BENCHMARK(BM_BayesRisk)->RangeMultiplier(2)->Range(2, 32);

void BM_CommonThresholdSolve(benchmark::State& state) {
  const TeamProblem problem(0.6, 1.0, 2.0,
                            model_for(static_cast<int>(state.range(0))), 5, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_identical_threshold(problem));
  }
}
BENCHMARK(BM_CommonThresholdSolve)->Arg(0)->Arg(1);

void BM_PerAgentSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TeamProblem problem(0.6, 1.0, 2.0, model_for(0), n, (n + 1) / 2);
  const std::vector<double> start(static_cast<std::size_t>(n), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pbpo_optimize(problem, start));
  }
}
BENCHMARK(BM_PerAgentSolve)->DenseRange(2, 7);

void BM_PolicyTreeSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TeamProblem problem(0.6, 1.0, 2.0, model_for(0), n, (n + 1) / 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_policy(problem));
  }
}
BENCHMARK(BM_PolicyTreeSolve)->DenseRange(2, 12)->Unit(benchmark::kMicrosecond);

void BM_VerifySecretBallot(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TeamProblem problem(0.6, 1.0, 2.0, model_for(0), n, (n + 1) / 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_secret_ballot(problem));
  }
}
BENCHMARK(BM_VerifySecretBallot)->DenseRange(2, 8)->Unit(benchmark::kMicrosecond);

void BM_SimulateParallel(benchmark::State& state) {
  const TeamProblem problem(0.6, 1.0, 2.0, model_for(0), 5, 2);
  const std::vector<double> thresholds(5, 0.3);
  const std::uint64_t trials = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_parallel(problem, thresholds, trials, 7));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(trials));
}
BENCHMARK(BM_SimulateParallel)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

}  // namespace

BENCHMARK_MAIN();
