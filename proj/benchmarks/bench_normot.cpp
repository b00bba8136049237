#include <benchmark/benchmark.h>

#include "normot/cycles.hpp"
#include "normot/instances.hpp"
#include "normot/kantorovich.hpp"
#include "normot/monge.hpp"
#include "normot/partition.hpp"

using namespace normot;

namespace {

void BM_SolveShift(benchmark::State& st) {
  const Instance inst = shift_instance(static_cast<int>(st.range(0)));
  const CostFn c = norm_cost(inst.norm);
  for (auto _ : st) benchmark::DoNotOptimize(solve_primal(inst.mu, inst.nu, c));
  st.SetComplexityN(inst.mu.size());
}
BENCHMARK(BM_SolveShift)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SolveRandom(benchmark::State& st) {
  RandomInstanceSpec spec;
  spec.n = spec.m = static_cast<int>(st.range(0));
  spec.dim = 3;
  spec.max_vertices = 12;
  const Instance inst = random_instance(spec, 7);
  const CostFn c = norm_cost(inst.norm);
  for (auto _ : st) benchmark::DoNotOptimize(solve_primal(inst.mu, inst.nu, c));
}
BENCHMARK(BM_SolveRandom)->Arg(16)->Arg(50)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& st) {
  const Instance inst = shift_instance(static_cast<int>(st.range(0)));
  const CostFn c = norm_cost(inst.norm);
  const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
  const Potential pot = central_potential(plan, inst.mu, inst.nu, c);
  for (auto _ : st) benchmark::DoNotOptimize(decompose(plan, pot, inst.mu, inst.nu, inst.norm));
}
BENCHMARK(BM_Decompose)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_AnalyzeCycles(benchmark::State& st) {
  RandomInstanceSpec spec;
  spec.n = spec.m = static_cast<int>(st.range(0));
  spec.dim = 2;
  const Instance inst = random_instance(spec, 3);
  const CostFn c = norm_cost(inst.norm);
  const Carriage car = Carriage::from_plan(solve_primal(inst.mu, inst.nu, c));
  for (auto _ : st) benchmark::DoNotOptimize(analyze_cycles(car, inst.mu, inst.nu, c));
}
BENCHMARK(BM_AnalyzeCycles)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_AssembleMap(benchmark::State& st) {
  RandomInstanceSpec spec;
  spec.n = spec.m = static_cast<int>(st.range(0));
  spec.dim = 2;
  spec.uniform_weights = true;
  const Instance inst = random_instance(spec, 11);
  const CostFn c = norm_cost(inst.norm);
  const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
  const Decomposition dec = decompose(plan, central_potential(plan, inst.mu, inst.nu, c), inst.mu, inst.nu, inst.norm);
  const SecondaryPlan sec = secondary_select(inst.mu, inst.nu, c, plan);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_map(dec.partition, sec.plan, inst.mu, inst.nu));
}
BENCHMARK(BM_AssembleMap)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
