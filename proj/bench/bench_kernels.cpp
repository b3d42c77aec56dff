// OpenMP kernels against their serial references, plus one cell solve for scale.
#include <benchmark/benchmark.h>

#include <vector>

#include "homog/cell_problems.hpp"
#include "homog/geometry.hpp"
#include "homog/kernels.hpp"

using namespace homog;

namespace {

std::vector<Vec> history(int len, int size) {
  std::vector<Vec> h;
  for (int k = 0; k < len; ++k) h.push_back(Vec::LinSpaced(size, k, k + 1.0));
  return h;
}

template <bool Parallel>
void BM_WeightedSum(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  const auto hist = history(len, 2 * 64 * 64);
  const std::vector<double> w(len, 0.5);
  Vec out;
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::weighted_sum(hist, w, 0, out);
    else
      kernels::weighted_sum_serial(hist, w, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Divergence(benchmark::State& state) {
  const StaggeredGrid g(2, static_cast<int>(state.range(0)), Boundary::Periodic);
  const Vec u = Vec::LinSpaced(g.total_faces(), 0.0, 1.0);
  Vec out;
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::divergence(g, u, out);
    else
      kernels::divergence_serial(g, u, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_StokesCellSolve(benchmark::State& state) {
  GeometryDescriptor d;
  d.kind = GeometryKind::Cross;
  d.dim = 2;
  d.n = static_cast<int>(state.range(0));
  const CellGeometry cell = build_cell(d);
  for (auto _ : state) {
    StokesCellSolver s(cell, 1.0, ExtendedParam(0.0), ExtendedParam::infinity());
    benchmark::DoNotOptimize(s.solve(StokesRhs::IJ(0, 1)).V.data());
  }
}

}  // namespace

BENCHMARK(BM_WeightedSum<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_WeightedSum<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_Divergence<true>)->Arg(128)->Arg(512);
BENCHMARK(BM_Divergence<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_StokesCellSolve)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
