#include <benchmark/benchmark.h>

#include "objnav/semantic_map.hpp"

namespace {

void BM_ProjectObservation(benchmark::State& state) {
  objnav::SemanticGrid grid;
  objnav::CameraModel cam;
  objnav::Observation obs;
  obs.depth.assign(cam.columns, 2.0);
  obs.labels.assign(cam.columns, 0);
  for (int c = 0; c < cam.columns; c += 8) obs.labels[c] = 1 + c % 21;
  for (auto _ : state) {
    grid.project_observation(obs, cam);
    benchmark::DoNotOptimize(grid.agent_cell());
  }
}
BENCHMARK(BM_ProjectObservation);

void BM_CropEgocentric(benchmark::State& state) {
  objnav::SemanticGrid grid;
  for (auto _ : state) {
    auto crop = grid.crop_egocentric();
    benchmark::DoNotOptimize(crop.cells.data());
  }
}
BENCHMARK(BM_CropEgocentric);

}  // namespace
