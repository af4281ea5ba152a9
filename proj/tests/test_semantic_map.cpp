#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "objnav/semantic_map.hpp"

using namespace objnav;

namespace {

Observation single_ray(double depth, int label, EpisodicPose pose) {
  Observation obs;
  obs.depth = {depth};
  obs.labels = {label};
  obs.pose = pose;
  return obs;
}

const CameraModel kOneColumn{1, 0.0, 0.0, 10.0};

}  // namespace

TEST_CASE("reset stamps trail and location at the origin cell") {
  SemanticGrid grid;
  CHECK(grid.at(SemanticGrid::kTrailChannel, 256, 256));
  CHECK(grid.at(SemanticGrid::kLocationChannel, 256, 256));
  CHECK(grid.channel_popcount(SemanticGrid::kLocationChannel) == 1);
  CHECK(grid.channel_popcount(SemanticGrid::kOccupationChannel) == 0);
  CHECK(grid.agent_cell() == CellIndex{256, 256});
}

TEST_CASE("projection marks the hit cell in label and occupation channels") {
  SemanticGrid grid;
  // 1 m straight ahead from the origin: cell (276, 256).
  grid.project_observation(single_ray(1.0, 5, {0, 0, 0}), kOneColumn);
  CHECK(grid.at(5, 276, 256));
  CHECK(grid.at(SemanticGrid::kOccupationChannel, 276, 256));
  CHECK(!grid.at(SemanticGrid::kObstacleChannel, 276, 256));
  // Label 0 goes to the bare-obstacle channel.
  grid.project_observation(single_ray(1.0, 0, {0, 0, kPi / 2}), kOneColumn);
  CHECK(grid.at(SemanticGrid::kObstacleChannel, 256, 276));
  CHECK(grid.at(SemanticGrid::kOccupationChannel, 256, 276));
}

TEST_CASE("projection respects the observing pose and heading") {
  SemanticGrid grid;
  grid.project_observation(single_ray(0.5, 1, {1.0, 2.0, kPi}), kOneColumn);
  // From (1, 2) facing -x, a 0.5 m return lands at (0.5, 2).
  CHECK(grid.at(1, 256 + 10, 256 + 40));
  CHECK(grid.agent_cell() == CellIndex{256 + 20, 256 + 40});
  CHECK(grid.at(SemanticGrid::kTrailChannel, 256 + 20, 256 + 40));
}

TEST_CASE("invalid depths are skipped, bad labels rejected") {
  SemanticGrid grid;
  grid.project_observation(single_ray(kInvalidDepth, 3, {0, 0, 0}),
                           kOneColumn);
  CHECK(grid.channel_popcount(SemanticGrid::kOccupationChannel) == 0);
  CHECK_THROWS_AS(
      grid.project_observation(single_ray(1.0, 22, {0, 0, 0}), kOneColumn),
      std::invalid_argument);
  CHECK_THROWS_AS(
      grid.project_observation(single_ray(1.0, -1, {0, 0, 0}), kOneColumn),
      std::invalid_argument);
  Observation mismatched;
  mismatched.depth = {1.0, 2.0};
  mismatched.labels = {1};
  CHECK_THROWS_AS(grid.project_observation(mismatched, kOneColumn),
                  std::invalid_argument);
}

TEST_CASE("occupation channel stays the max over channels 0..21") {
  SemanticGrid grid;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.2, 5.0);
  std::uniform_int_distribution<int> lab(0, SemanticGrid::kNumClasses);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int k = 0; k < 200; ++k) {
    grid.project_observation(single_ray(d(rng), lab(rng), {0, 0, ang(rng)}),
                             kOneColumn);
  }
  for (int i = 250; i < 262; ++i) {
    for (int j = 250; j < 262; ++j) {
      bool any = false;
      for (int ch = 0; ch <= SemanticGrid::kNumClasses; ++ch) {
        any = any || grid.at(ch, i, j);
      }
      CHECK(grid.at(SemanticGrid::kOccupationChannel, i, j) == any);
    }
  }
}

TEST_CASE("location channel tracks the agent, trail accumulates") {
  SemanticGrid grid;
  grid.project_observation(single_ray(2.0, 1, {0.5, 0.0, 0.0}), kOneColumn);
  CHECK(grid.channel_popcount(SemanticGrid::kLocationChannel) == 1);
  CHECK(grid.at(SemanticGrid::kLocationChannel, 266, 256));
  CHECK(!grid.at(SemanticGrid::kLocationChannel, 256, 256));
  CHECK(grid.at(SemanticGrid::kTrailChannel, 256, 256));
  CHECK(grid.at(SemanticGrid::kTrailChannel, 266, 256));
  CHECK(grid.channel_popcount(SemanticGrid::kTrailChannel) == 2);
}

TEST_CASE("clear_obstacle retracts channels 0..22 only") {
  SemanticGrid grid;
  grid.project_observation(single_ray(0.0, 7, {0, 0, 0}), kOneColumn);
  CHECK(grid.at(7, 256, 256));
  grid.clear_obstacle({256, 256});
  CHECK(!grid.at(7, 256, 256));
  CHECK(!grid.at(SemanticGrid::kOccupationChannel, 256, 256));
  CHECK(grid.at(SemanticGrid::kTrailChannel, 256, 256));
  grid.clear_obstacle({-5, 9999}); // out of bounds: ignored
}

TEST_CASE("egocentric crop is 25x256x256, centered, zero padded") {
  SemanticGrid grid;
  // Put the agent near the map corner so the window hangs off the edge.
  grid.project_observation(single_ray(1.0, 2, {-12.0, -12.0, 0.0}),
                           kOneColumn);
  CellIndex agent = grid.agent_cell();
  MapCrop crop = grid.crop_egocentric();
  CHECK(crop.cells.size() ==
        std::size_t(SemanticGrid::kChannels) * MapCrop::kSize * MapCrop::kSize);
  // Center of the crop is the agent's cell.
  CHECK(crop.at(SemanticGrid::kLocationChannel, MapCrop::kHalf, MapCrop::kHalf));
  // The hit cell appears at its offset from the agent.
  CHECK(crop.at(2, MapCrop::kHalf + 20, MapCrop::kHalf));
  // Cells beyond the map edge read zero in every channel.
  int off_map_u = MapCrop::kHalf - agent.i - 1; // maps to i = -1
  REQUIRE(off_map_u >= 0);
  for (int ch = 0; ch < SemanticGrid::kChannels; ++ch) {
    CHECK(!crop.at(ch, off_map_u, MapCrop::kHalf));
  }
}

TEST_CASE("channel dumps write PGM and CSV files") {
  SemanticGrid grid;
  grid.project_observation(single_ray(1.0, 1, {0, 0, 0}), kOneColumn);
  auto dir = std::filesystem::temp_directory_path() / "objnav_map_dump_test";
  std::filesystem::create_directories(dir);
  auto pgm = (dir / "ch1.pgm").string();
  auto csv = (dir / "ch1.csv").string();
  grid.dump_channel_pgm(1, pgm);
  grid.dump_channel_csv(1, csv);
  std::ifstream p(pgm, std::ios::binary);
  std::string magic;
  p >> magic;
  CHECK(magic == "P5");
  std::ifstream c(csv);
  CHECK(c.good());
  std::filesystem::remove_all(dir);
}
