#include <benchmark/benchmark.h>

#include "objnav/simulator.hpp"

namespace {

void BM_Observe(benchmark::State& state) {
  auto scenario = objnav::generate_scene(11);
  auto agent = objnav::make_agent(scenario.episode);
  objnav::CameraModel cam;
  for (auto _ : state) {
    auto obs = objnav::observe(scenario.scene, agent, cam);
    benchmark::DoNotOptimize(obs.depth.data());
  }
}
BENCHMARK(BM_Observe);

void BM_DistanceField(benchmark::State& state) {
  auto scenario = objnav::generate_scene(11);
  for (auto _ : state) {
    objnav::DistanceField field(scenario.scene,
                                scenario.episode.target_class);
    benchmark::DoNotOptimize(&field);
  }
}
BENCHMARK(BM_DistanceField);

}  // namespace
