#include <benchmark/benchmark.h>

#include <random>

#include "objnav/planning.hpp"

namespace {

objnav::BinaryGrid random_grid(int n, double density, std::uint64_t seed) {
  objnav::BinaryGrid g(n, n);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if ((rng() >> 11) * 0x1.0p-53 < density) g.set(i, j);
    }
  }
  g.set(0, 0, false);
  g.set(n - 1, n - 1, false);
  return g;
}

void BM_AstarFullMap(benchmark::State& state) {
  const int n = int(state.range(0));
  auto grid = random_grid(n, 0.25, 7);
  for (auto _ : state) {
    try {
      auto path = objnav::astar(grid, {0, 0}, {n - 1, n - 1});
      benchmark::DoNotOptimize(path.cells.data());
    } catch (const objnav::PlanningError&) {
    }
  }
}
BENCHMARK(BM_AstarFullMap)->Arg(64)->Arg(256)->Arg(512);

}  // namespace
