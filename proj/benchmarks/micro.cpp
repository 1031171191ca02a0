#include <benchmark/benchmark.h>

#include "spca/bnb.hpp"
#include "spca/data.hpp"
#include "spca/l1.hpp"
#include "spca/model.hpp"
#include "spca/primal.hpp"
#include "spca/rng.hpp"

namespace {

using namespace spca;

CovarianceMatrix spiked(int n) {
  GeneratorSpec g;
  g.n = n;
  g.seed = 1;
  return generate(g);
}

void BM_Projection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CounterRng rng(3);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(project_intersection(v, 10));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Projection)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ThetaL1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CounterRng rng(4);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  for (auto _ : state) benchmark::DoNotOptimize(theta_l1(v, 10));
}
BENCHMARK(BM_ThetaL1)->Arg(200)->Arg(2000);

void BM_Heuristic(benchmark::State& state) {
  const CovarianceMatrix a = spiked(static_cast<int>(state.range(0)));
  HeuristicConfig cfg;
  cfg.k = 10;
  for (auto _ : state) benchmark::DoNotOptimize(best_of_restarts(a, cfg));
}
BENCHMARK(BM_Heuristic)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_NodeRelaxation(benchmark::State& state) {
  const CovarianceMatrix a = spiked(static_cast<int>(state.range(0)));
  const auto spec = eigendecompose(a);
  const auto split = split_at(spec, 0.5 * (spec.eigenvalues(9) + spec.eigenvalues(10)));
  const auto model = build_model(spec, split, 10, {Formulation::Perturbed, ThetaRule::L0});
  const auto root = root_node(model);
  for (auto _ : state) benchmark::DoNotOptimize(solve_node_relaxation(model, root));
}
BENCHMARK(BM_NodeRelaxation)->Arg(30)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
