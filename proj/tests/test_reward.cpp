#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "objnav/reward.hpp"

using namespace objnav;

namespace {

StepRecord rec(DiscreteAction a, DiscreteAction oracle, double before,
               double after, bool success = false) {
  StepRecord r;
  r.action = a;
  r.oracle_action = oracle;
  r.dist_before = before;
  r.dist_after = after;
  r.success = success;
  return r;
}

}  // namespace

TEST_CASE("step_reward component values are exact") {
  RewardParams p;
  // Idle non-matching step, no movement.
  CHECK(step_reward(rec(DiscreteAction::TurnLeft, DiscreteAction::TurnRight,
                        3.0, 3.0),
                    p) == -1e-4);
  // Oracle-matching step replaces the default.
  CHECK(step_reward(rec(DiscreteAction::TurnLeft, DiscreteAction::TurnLeft,
                        3.0, 3.0),
                    p) == 1e-3);
  // Distance decrease adds linearly.
  CHECK(step_reward(rec(DiscreteAction::MoveForward,
                        DiscreteAction::MoveForward, 3.0, 2.75),
                    p) == 1e-3 + 0.25);
  // Moving away subtracts.
  CHECK(step_reward(rec(DiscreteAction::MoveForward, DiscreteAction::TurnLeft,
                        2.75, 3.0),
                    p) == -1e-4 - 0.25);
  // Terminal success adds the bonus on top.
  CHECK(step_reward(rec(DiscreteAction::Stop, DiscreteAction::Stop, 0.5, 0.5,
                        true),
                    p) == 1e-3 + 2.5);
}

TEST_CASE("custom coefficients are honored") {
  RewardParams p{-1.0, 2.0, 10.0};
  CHECK(step_reward(rec(DiscreteAction::Stop, DiscreteAction::TurnLeft, 1.0,
                        1.0),
                    p) == -1.0);
  CHECK(step_reward(rec(DiscreteAction::Stop, DiscreteAction::Stop, 1.0, 1.0,
                        true),
                    p) == 12.0);
}

TEST_CASE("trajectory rewards telescope over the distance terms") {
  RewardParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 20.0);
  std::uniform_int_distribution<int> act(0, 3);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int traj = 0; traj < 1000; ++traj) {
    std::uniform_int_distribution<int> len(1, 30);
    int T = len(rng);
    std::vector<StepRecord> steps;
    double dist = d(rng);
    int matches = 0;
    for (int t = 0; t < T; ++t) {
      double next = d(rng);
      auto a = DiscreteAction(act(rng));
      auto o = coin(rng) ? a : DiscreteAction((act(rng) + 1) % 4);
      bool success = t == T - 1 && coin(rng);
      StepRecord r = rec(a, o, dist, next, success);
      r.reward = step_reward(r, p);
      if (a == o) ++matches;
      steps.push_back(r);
      dist = next;
    }
    double total = 0.0, shaping = 0.0;
    for (const auto& r : steps) {
      total += r.reward;
      shaping += r.dist_before - r.dist_after;
    }
    double expected = matches * p.oracle_match +
                      (T - matches) * p.step_default + shaping +
                      (steps.back().success ? p.success_bonus : 0.0);
    CHECK(total == doctest::Approx(expected).epsilon(1e-12));
    // The shaping terms telescope to first-minus-last distance.
    CHECK(shaping == doctest::Approx(steps.front().dist_before -
                                     steps.back().dist_after)
                         .epsilon(1e-12));
  }
}

TEST_CASE("spl matches its definition") {
  std::vector<EpisodeResult> rs;
  rs.push_back({true, 10.0, 10.0, 0.0});  // perfect: contributes 1
  rs.push_back({true, 20.0, 10.0, 0.0});  // detour: contributes 0.5
  rs.push_back({false, 5.0, 10.0, 4.0});  // failure: contributes 0
  CHECK(spl(rs) == doctest::Approx(1.5 / 3));
  // Path shorter than the geodesic (measurement slack) caps at 1.
  std::vector<EpisodeResult> caps{{true, 5.0, 10.0, 0.0}};
  CHECK(spl(caps) == doctest::Approx(1.0));
}

TEST_CASE("soft_spl uses fractional progress") {
  std::vector<EpisodeResult> rs;
  rs.push_back({false, 10.0, 10.0, 5.0}); // halfway: 0.5 * (10/10)
  CHECK(soft_spl(rs) == doctest::Approx(0.5));
  // Ending farther than the start clamps at zero.
  std::vector<EpisodeResult> worse{{false, 10.0, 10.0, 25.0}};
  CHECK(soft_spl(worse) == doctest::Approx(0.0));
}

TEST_CASE("aggregate reports the four leaderboard columns") {
  std::vector<EpisodeResult> rs;
  rs.push_back({true, 12.0, 10.0, 0.3});
  rs.push_back({false, 8.0, 6.0, 2.0});
  MetricsReport m = aggregate(rs);
  CHECK(m.success_rate == doctest::Approx(0.5));
  CHECK(m.distance_to_goal == doctest::Approx((0.3 + 2.0) / 2));
  CHECK(m.spl == doctest::Approx(0.5 * (10.0 / 12.0)));
  CHECK(m.softspl == doctest::Approx(
                         0.5 * ((1 - 0.3 / 10.0) * (10.0 / 12.0) +
                                (1 - 2.0 / 6.0) * (6.0 / 8.0))));
}

TEST_CASE("metric bounds hold on fuzzed batches") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> len(0.01, 50.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> n(1, 20);
  for (int batch = 0; batch < 1000; ++batch) {
    std::vector<EpisodeResult> rs;
    int count = n(rng);
    for (int k = 0; k < count; ++k) {
      EpisodeResult r;
      r.shortest_path = len(rng);
      r.path_length = len(rng);
      r.final_distance = coin(rng) ? len(rng) : 0.0;
      r.success = r.final_distance < 1.0 && coin(rng);
      rs.push_back(r);
    }
    MetricsReport m = aggregate(rs);
    CHECK(m.spl >= 0.0);
    CHECK(m.spl <= 1.0);
    CHECK(m.softspl >= 0.0);
    CHECK(m.softspl <= 1.0);
    CHECK(m.success_rate >= 0.0);
    CHECK(m.success_rate <= 1.0);
    CHECK(m.spl <= m.success_rate + 1e-15);
  }
}
