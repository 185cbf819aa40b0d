// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "cophase/antenna.hpp"
#include "cophase/experiments.hpp"
#include "cophase/linear_solvers.hpp"
#include "cophase/nonlinear_solvers.hpp"

using namespace cophase;

namespace {

ProblemInstance instance(Index n) {
  return draw_gaussian_instance(GridPoint{n, n, 2, 1e-4}, 1);
}

void BM_BuildQ(benchmark::State& state) {
  const ProblemInstance inst = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_q(inst.op, inst.obs));
}
BENCHMARK(BM_BuildQ)->Arg(30)->Arg(100)->Arg(300);

void BM_BuildR(benchmark::State& state) {
  const ProblemInstance inst = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_r(inst.op, inst.obs));
}
BENCHMARK(BM_BuildR)->Arg(30)->Arg(100)->Arg(300);

void BM_Kernel(benchmark::State& state, KernelMethod method) {
  const ProblemInstance inst = instance(state.range(0));
  const NullSpaceSystem sys = build_q(inst.op, inst.obs);
  for (auto _ : state) benchmark::DoNotOptimize(smallest_singular_vector(sys, method));
}
BENCHMARK_CAPTURE(BM_Kernel, svd, KernelMethod::ExactSvd)->Arg(30)->Arg(100)->Arg(300);
BENCHMARK_CAPTURE(BM_Kernel, iterative, KernelMethod::Iterative)->Arg(30)->Arg(100)->Arg(300);

void BM_CostGradient(benchmark::State& state) {
  const ProblemInstance inst = instance(state.range(0));
  const CostFunctional f = CostFunctional::make(CostKind::EliminatedPhase, inst.op, inst.obs);
  const RVector p = f.pack(inst.xi);
  RVector g;
  for (auto _ : state) benchmark::DoNotOptimize(f.value(p, g));
}
BENCHMARK(BM_CostGradient)->Arg(30)->Arg(300);

void BM_DipoleOperator(benchmark::State& state) {
  const DipoleSourceSet sources = build_source_sphere(5.0, state.range(0));
  const MeasurementGrid grid = build_measurement_grid(8.0, state.range(0));
  const ProbeArrayLayout probe = ProbeArrayLayout::l_shape(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_dipole_operator(sources, grid, probe));
}
BENCHMARK(BM_DipoleOperator)->Arg(50)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
