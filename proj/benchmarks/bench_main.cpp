// Copyright 2026 The eoslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "eoslab/data.hpp"
#include "eoslab/dynamics.hpp"
#include "eoslab/geometry.hpp"

namespace {

using namespace eoslab;

void BM_GdSteps(benchmark::State& state) {
  const Dataset ds = gen_separable(state.range(0), 3, 0.3, 1);
  const MarginGeometry geo = solve_hard_margin(ds);
  const Index steps = 10000;
  for (auto _ : state) {
    const Trajectory tr = gd_run(ds, LossKind::Logistic, 1.0, steps, Vector::Zero(3), geo);
    benchmark::DoNotOptimize(tr.records.back().loss);
  }
  state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_GdSteps)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SolveHardMargin(benchmark::State& state) {
  const Dataset ds = gen_separable(state.range(0), 4, 0.3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_hard_margin(ds).gamma);
}
BENCHMARK(BM_SolveHardMargin)->Arg(20)->Arg(200)->Arg(2000);

void BM_MarginOffset(benchmark::State& state) {
  const Dataset ds = gen_separable(40, state.range(0), 0.3, 3);
  const MarginGeometry geo = solve_hard_margin(ds);
  for (auto _ : state) benchmark::DoNotOptimize(margin_offset(geo, ds));
}
BENCHMARK(BM_MarginOffset)->DenseRange(2, 5);

void BM_HessianTopEig(benchmark::State& state) {
  const Dataset ds = gen_separable(state.range(0), 3, 0.3, 4);
  const Vector w = Vector::Ones(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(hessian_top_eig(ds, LossKind::Logistic, w, 50));
}
BENCHMARK(BM_HessianTopEig)->Arg(20)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
