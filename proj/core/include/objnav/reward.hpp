#ifndef OBJNAV_REWARD_HPP_
#define OBJNAV_REWARD_HPP_

#include <span>

#include "objnav/planning.hpp"

namespace objnav {

/// Shaped-reward coefficients. The success bonus is 10x the 0.25 m
/// forward step size.
struct RewardParams {
  double step_default = -1e-4;
  double oracle_match = 1e-3;
  double success_bonus = 2.5;
};

/// One simulator step: the action taken, what the greedy oracle would
/// have done, and the geodesic distances to the nearest target before
/// and after the step.
struct StepRecord {
  int t = 0;
  DiscreteAction action = DiscreteAction::Stop;
  DiscreteAction oracle_action = DiscreteAction::Stop;
  double dist_before = 0.0; // meters
  double dist_after = 0.0;  // meters
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

struct EpisodeResult {
  bool success = false;
  double path_length = 0.0;    // meters actually traveled
  double shortest_path = 0.0;  // geodesic meters from start to nearest target
  double final_distance = 0.0; // geodesic meters at episode end
};

/// Per-step shaped reward: the oracle-match bonus replaces the step
/// default, plus the distance-to-goal decrease, plus the terminal
/// success bonus.
inline double step_reward(const StepRecord& rec, const RewardParams& p) {
  double r = (rec.action == rec.oracle_action) ? p.oracle_match
                                               : p.step_default;
  r += rec.dist_before - rec.dist_after;
  if (rec.success) r += p.success_bonus;
  return r;
}

/// Success weighted by path length: mean of S * l / max(p, l).
double spl(std::span<const EpisodeResult> results);

/// SPL with binary success replaced by fractional progress,
/// max(0, 1 - final_distance / shortest_path).
double soft_spl(std::span<const EpisodeResult> results);

/// The four leaderboard columns.
struct MetricsReport {
  double spl = 0.0;
  double softspl = 0.0;
  double distance_to_goal = 0.0;
  double success_rate = 0.0;
};

MetricsReport aggregate(std::span<const EpisodeResult> results);

}  // namespace objnav

#endif  // OBJNAV_REWARD_HPP_
