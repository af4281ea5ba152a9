#include <cmath>

#include "doctest.h"
#include "objnav/policy.hpp"
#include "objnav/runner.hpp"

using namespace objnav;

namespace {

MapCrop empty_crop() {
  MapCrop crop;
  crop.cells.assign(std::size_t(SemanticGrid::kChannels) * MapCrop::kSize *
                        MapCrop::kSize,
                    0);
  return crop;
}

void set_crop(MapCrop& crop, int ch, int u, int v) {
  crop.cells[(std::size_t(ch) * MapCrop::kSize + u) * MapCrop::kSize + v] = 1;
}

}  // namespace

TEST_CASE("representation names round-trip") {
  CHECK(representation_from_string("cartesian") ==
        GoalRepresentation::Cartesian);
  CHECK(representation_from_string("polar") == GoalRepresentation::Polar);
  CHECK(to_string(GoalRepresentation::Polar) == std::string("polar"));
  CHECK_THROWS_AS(representation_from_string("euler"), std::invalid_argument);
}

TEST_CASE("random policy emits seeded values in [0, 1]") {
  RandomPolicy p(9, GoalRepresentation::Cartesian);
  RandomPolicy q(9, GoalRepresentation::Cartesian);
  RandomPolicy r(10, GoalRepresentation::Cartesian);
  MapCrop crop = empty_crop();
  PolicyInput in{crop, 1, 0.0, {256, 256}};
  bool all_equal = true;
  for (int k = 0; k < 100; ++k) {
    PolicyOutput a = p.step(in), b = q.step(in), c = r.step(in);
    CHECK(a.pred[0] >= 0.0);
    CHECK(a.pred[0] <= 1.0);
    CHECK(a.pred[1] >= 0.0);
    CHECK(a.pred[1] <= 1.0);
    CHECK(a.pred == b.pred);
    all_equal = all_equal && a.pred == c.pred;
  }
  CHECK(!all_equal); // different seed, different stream
}

TEST_CASE("seen_target heads for the nearest seen target cell") {
  MapCrop crop = empty_crop();
  // Target class 3 seen 10 cells ahead (+i) of the agent.
  set_crop(crop, 3, MapCrop::kHalf + 10, MapCrop::kHalf);
  // A farther sighting to the side must lose.
  set_crop(crop, 3, MapCrop::kHalf, MapCrop::kHalf + 40);
  PolicyInput in{crop, 3, 0.0, {256, 256}};
  SeenTargetPolicy p(GoalRepresentation::Cartesian);
  PolicyOutput out = p.step(in);
  CellIndex goal = decode_cartesian(out.pred[0], out.pred[1]);
  CHECK(goal == CellIndex{266, 256});
  // Polar representation decodes back to the same cell.
  SeenTargetPolicy q(GoalRepresentation::Polar);
  PolicyOutput po = q.step(in);
  PolarGoal pg = decode_polar(po.pred[0], po.pred[1], kDefaultRhoMax);
  EpisodicPose agent{0, 0, 0};
  CHECK(polar_goal_to_cell(pg, agent, MapSpec{}) == CellIndex{266, 256});
}

TEST_CASE("seen_target requires a valid class id") {
  MapCrop crop = empty_crop();
  PolicyInput in{crop, 0, 0.0, {256, 256}};
  SeenTargetPolicy p(GoalRepresentation::Cartesian);
  CHECK_THROWS_AS(p.step(in), std::invalid_argument);
}

TEST_CASE("frontier targets the rim of explored space, beyond min range") {
  MapCrop crop = empty_crop();
  // Trail at the center: explored space grows from there.
  set_crop(crop, SemanticGrid::kTrailChannel, MapCrop::kHalf, MapCrop::kHalf);
  PolicyInput in{crop, 1, 0.0, {256, 256}};
  FrontierPolicy p(GoalRepresentation::Cartesian);
  PolicyOutput out = p.step(in);
  CellIndex goal = decode_cartesian(out.pred[0], out.pred[1]);
  double cells = std::hypot(double(goal.i - 256), double(goal.j - 256));
  MapSpec spec;
  CHECK(cells * spec.resolution >= 0.75);        // beyond the minimum range
  CHECK(cells * spec.resolution <= 1.0 + 0.15);  // on the dilation rim
}

TEST_CASE("frontier falls back to the center prediction without a trail") {
  MapCrop crop = empty_crop();
  PolicyInput in{crop, 1, 0.0, {256, 256}};
  FrontierPolicy p(GoalRepresentation::Cartesian);
  PolicyOutput out = p.step(in);
  CHECK(out.pred[0] == 0.5);
  CHECK(out.pred[1] == 0.5);
}

TEST_CASE("seen_target falls back to frontier exploration when blind") {
  MapCrop crop = empty_crop();
  set_crop(crop, SemanticGrid::kTrailChannel, MapCrop::kHalf, MapCrop::kHalf);
  PolicyInput in{crop, 7, 0.0, {256, 256}};
  SeenTargetPolicy seen(GoalRepresentation::Cartesian);
  FrontierPolicy frontier(GoalRepresentation::Cartesian);
  CHECK(seen.step(in).pred == frontier.step(in).pred);
}

TEST_CASE("oracle goal is adjacent to a true target instance") {
  Scenario sc = generate_scene(episode_seed(7, 3));
  DistanceField field(sc.scene, sc.episode.target_class);
  OracleGoalPolicy p(sc.scene, sc.episode, GoalRepresentation::Cartesian);
  MapCrop crop = empty_crop();
  PolicyInput in{crop, sc.episode.target_class, 0.0, {256, 256}};
  PolicyOutput out = p.step(in);
  CellIndex goal = decode_cartesian(out.pred[0], out.pred[1]);
  // Decode the map cell back to world and measure the true distance.
  MapSpec spec;
  EpisodicPose gep{cell_center_x(goal, spec), cell_center_y(goal, spec), 0};
  WorldPose gw = episodic_to_world(gep, sc.episode.start);
  CHECK(field.meters_at(gw) < 0.2);
}

TEST_CASE("oracle rejects scenes without the target class") {
  Scenario sc = generate_scene(episode_seed(7, 3));
  OracleGoalPolicy p(sc.scene, sc.episode, GoalRepresentation::Cartesian);
  MapCrop crop = empty_crop();
  PolicyInput in{crop, 0, 0.0, {256, 256}};
  CHECK_THROWS_AS(p.step(in), std::invalid_argument);
}

TEST_CASE("make_policy builds each scripted policy by name") {
  Scenario sc = generate_scene(episode_seed(7, 0));
  for (const char* name : {"random", "frontier", "seen_target", "oracle"}) {
    auto p = make_policy(name, GoalRepresentation::Cartesian, 1, &sc);
    CHECK(p != nullptr);
  }
  CHECK_THROWS_AS(make_policy("oracle", GoalRepresentation::Cartesian, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_policy("ppo", GoalRepresentation::Cartesian, 1),
                  std::invalid_argument);
}
