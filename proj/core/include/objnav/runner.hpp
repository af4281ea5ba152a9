#ifndef OBJNAV_RUNNER_HPP_
#define OBJNAV_RUNNER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "objnav/policy.hpp"
#include "objnav/reward.hpp"

namespace objnav {

struct RunConfig {
  std::uint64_t seed = 1;
  int episodes = 10;
  std::string policy = "frontier";
  GoalRepresentation repr = GoalRepresentation::Cartesian;
  RewardParams reward;
  ControllerParams controller;
  CameraModel camera;
  GenParams gen;
  Kinematics kinematics;
  MapSpec map;
  double rho_max = kDefaultRhoMax;
  double local_lookahead_m = 0.5;
  int replan_every = 1;
  double label_noise = 0.0;
  std::string out_dir;
  bool dump_maps = false;

  static RunConfig from_json(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

struct EpisodeLog {
  std::uint64_t scene_seed = 0;
  int target_class = 0;
  EpisodeResult result;
  std::vector<StepRecord> steps;

  std::string to_json_line() const;
};

/// One full rollout of the per-step pipeline: observe, project, crop,
/// policy prediction, goal decode, A* local goal, controller action,
/// simulator step, shaped reward. Ends on STOP, max_steps, or a trapped
/// agent (which fails the episode).
EpisodeLog run_episode(const RunConfig& config, const Scenario& scenario,
                       Policy& policy, std::uint64_t scene_seed = 0);

struct BatchReport {
  MetricsReport metrics;
  std::vector<EpisodeLog> episodes;
};

/// Generate, run, and aggregate `config.episodes` seeded episodes.
/// When config.out_dir is set, writes report.json and episodes.jsonl
/// there (and per-step map dumps with dump_maps).
BatchReport run_batch(const RunConfig& config);

std::string metrics_to_json(const MetricsReport& m);

/// Per-episode scene seed derived from the batch seed.
std::uint64_t episode_seed(std::uint64_t batch_seed, int episode_index);

}  // namespace objnav

#endif  // OBJNAV_RUNNER_HPP_
