#include "objnav/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace objnav {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

nlohmann::json step_to_json(const StepRecord& rec) {
  return {{"t", rec.t},
          {"action", to_string(rec.action)},
          {"oracle_action", to_string(rec.oracle_action)},
          {"dist_before", rec.dist_before},
          {"dist_after", rec.dist_after},
          {"reward", rec.reward},
          {"done", rec.done},
          {"success", rec.success}};
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t batch_seed, int episode_index) {
  return mix64(batch_seed ^ (std::uint64_t(episode_index) << 32));
}

RunConfig RunConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunConfig c;
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("episodes")) c.episodes = j["episodes"].get<int>();
  if (j.contains("policy")) c.policy = j["policy"].get<std::string>();
  if (j.contains("representation")) {
    c.repr = representation_from_string(j["representation"].get<std::string>());
  }
  if (j.contains("reward")) {
    auto& r = j["reward"];
    if (r.contains("step_default"))
      c.reward.step_default = r["step_default"].get<double>();
    if (r.contains("oracle_match"))
      c.reward.oracle_match = r["oracle_match"].get<double>();
    if (r.contains("success_bonus"))
      c.reward.success_bonus = r["success_bonus"].get<double>();
  }
  if (j.contains("controller")) {
    auto& p = j["controller"];
    if (p.contains("turn_threshold_deg"))
      c.controller.turn_threshold =
          p["turn_threshold_deg"].get<double>() * kPi / 180.0;
    if (p.contains("stop_radius"))
      c.controller.stop_radius = p["stop_radius"].get<double>();
  }
  if (j.contains("camera")) {
    auto& p = j["camera"];
    if (p.contains("columns")) c.camera.columns = p["columns"].get<int>();
    if (p.contains("hfov_deg"))
      c.camera.hfov = p["hfov_deg"].get<double>() * kPi / 180.0;
    if (p.contains("min_range")) c.camera.min_range = p["min_range"].get<double>();
    if (p.contains("max_range")) c.camera.max_range = p["max_range"].get<double>();
  }
  if (j.contains("scene")) {
    auto& p = j["scene"];
    if (p.contains("world_size_m"))
      c.gen.world_size_m = p["world_size_m"].get<double>();
    if (p.contains("objects")) c.gen.objects = p["objects"].get<int>();
    if (p.contains("min_wall_segments"))
      c.gen.min_wall_segments = p["min_wall_segments"].get<int>();
    if (p.contains("max_wall_segments"))
      c.gen.max_wall_segments = p["max_wall_segments"].get<int>();
    if (p.contains("retries")) c.gen.retries = p["retries"].get<int>();
  }
  if (j.contains("rho_max")) c.rho_max = j["rho_max"].get<double>();
  if (j.contains("local_lookahead_m"))
    c.local_lookahead_m = j["local_lookahead_m"].get<double>();
  if (j.contains("replan_every")) c.replan_every = j["replan_every"].get<int>();
  if (j.contains("label_noise")) c.label_noise = j["label_noise"].get<double>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("dump_maps")) c.dump_maps = j["dump_maps"].get<bool>();
  if (c.episodes < 1) throw std::invalid_argument("config: episodes < 1");
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string EpisodeLog::to_json_line() const {
  nlohmann::json j;
  j["scene_seed"] = scene_seed;
  j["target_class"] = target_class;
  j["result"] = {{"success", result.success},
                 {"path_length", result.path_length},
                 {"shortest_path", result.shortest_path},
                 {"final_distance", result.final_distance}};
  j["steps"] = nlohmann::json::array();
  for (const auto& rec : steps) j["steps"].push_back(step_to_json(rec));
  return j.dump();
}

EpisodeLog run_episode(const RunConfig& config, const Scenario& scenario,
                       Policy& policy, std::uint64_t scene_seed) {
  const Scene& scene = scenario.scene;
  const Episode& episode = scenario.episode;
  DistanceField field(scene, episode.target_class);

  EpisodeLog log;
  log.scene_seed = scene_seed;
  log.target_class = episode.target_class;
  SemanticGrid grid(config.map);
  AgentState agent = make_agent(episode);
  log.result.shortest_path = field.meters_at(agent.world);

  CellIndex global_goal{config.map.origin_i, config.map.origin_j};
  bool have_goal = false;
  // Waypoints the local planner rejected, kept for the whole episode so
  // it routes around squeezes instead of re-proposing them.
  BinaryGrid avoid;
  // Committed local waypoint. Replanning the local goal from scratch
  // every step can flip between near-equal-cost routes around an
  // obstacle as the agent moves cell to cell, trapping it in a
  // two-pose limit cycle; instead the chosen waypoint is kept until
  // reached, aged out, or invalidated by a map update or goal change.
  CellIndex waypoint{};
  bool have_waypoint = false;
  int waypoint_age = 0;
  MapCrop crop; // reused across steps to skip the per-step allocation
  constexpr int kWaypointMaxAge = 8;
  // The two previously committed waypoints, for reversal detection: a
  // fresh plan that targets the waypoint before last means the route
  // choice flipped under the agent (two near-equal-cost routes around
  // an obstacle, and which is shorter depends on the cell the agent
  // happens to occupy). Blocking the reversal target in the avoid
  // overlay makes one route win for good.
  CellIndex wp_hist[2] = {{-1000, -1000}, {-1000, -1000}};

  std::filesystem::path dump_dir;
  if (config.dump_maps && !config.out_dir.empty()) {
    dump_dir = std::filesystem::path(config.out_dir) /
               ("maps_ep" + std::to_string(scene_seed));
    std::filesystem::create_directories(dump_dir);
  }

  for (int t = 0; t < episode.max_steps; ++t) {
    Observation obs =
        observe(scene, agent, config.camera, config.label_noise,
                mix64(log.scene_seed ^ std::uint64_t(t)));
    grid.project_observation(obs, config.camera);
    if (!dump_dir.empty()) {
      for (int ch = 0; ch < SemanticGrid::kChannels; ++ch) {
        grid.dump_channel_pgm(
            ch, (dump_dir / ("mapdump_step" + std::to_string(t) + "_ch" +
                             std::to_string(ch) + ".pgm")).string());
      }
    }

    EpisodicPose pose = agent.episodic();
    if (!have_goal || t % std::max(1, config.replan_every) == 0) {
      grid.crop_egocentric(crop);
      PolicyInput input{crop, episode.target_class, pose.yaw,
                        grid.agent_cell()};
      PolicyOutput out = policy.step(input);
      CellIndex prev_goal = global_goal;
      if (out.repr == GoalRepresentation::Cartesian) {
        global_goal = decode_cartesian(out.pred[0], out.pred[1], config.map);
      } else {
        PolarGoal pg = decode_polar(out.pred[0], out.pred[1], config.rho_max);
        global_goal = polar_goal_to_cell(pg, pose, config.map);
      }
      if (!have_goal || prev_goal.i != global_goal.i ||
          prev_goal.j != global_goal.j) {
        have_waypoint = false;
      }
      have_goal = true;
    }

    StepRecord rec;
    rec.t = t;
    rec.dist_before = field.meters_at(agent.world);
    try {
      PolarGoal lg;
      bool committed = have_waypoint && waypoint_age < kWaypointMaxAge;
      if (committed) {
        lg = cell_to_episodic_polar(pose, waypoint, config.map);
        // Arrived at an intermediate waypoint: plan the next one
        // instead of letting the controller read it as a stop.
        if (lg.rho <= config.controller.stop_radius) committed = false;
      }
      if (!committed) {
        lg = local_goal(grid, pose, global_goal, config.local_lookahead_m,
                        config.controller, config.kinematics.forward_step,
                        config.kinematics.turn_step, &avoid);
        CellIndex next_wp = polar_goal_to_cell(lg, pose, config.map);
        if (std::max(std::abs(next_wp.i - wp_hist[1].i),
                     std::abs(next_wp.j - wp_hist[1].j)) <= 1 &&
            avoid.in_bounds(next_wp.i, next_wp.j)) {
          avoid.set(next_wp.i, next_wp.j);
          lg = local_goal(grid, pose, global_goal, config.local_lookahead_m,
                          config.controller, config.kinematics.forward_step,
                          config.kinematics.turn_step, &avoid);
          next_wp = polar_goal_to_cell(lg, pose, config.map);
        }
        wp_hist[1] = wp_hist[0];
        wp_hist[0] = next_wp;
        waypoint = next_wp;
        have_waypoint = true;
        waypoint_age = 0;
      }
      ++waypoint_age;
      rec.action = local_planner_step(lg, config.controller);
    } catch (const PlanningError&) {
      // Trapped agent: the episode ends here as a failure.
      rec.action = DiscreteAction::Stop;
      rec.oracle_action = greedy_oracle_action(
          scene, field, agent, episode.success_radius, config.kinematics);
      rec.dist_after = rec.dist_before;
      rec.done = true;
      rec.reward = step_reward(rec, config.reward);
      log.steps.push_back(rec);
      break;
    }
    rec.oracle_action = greedy_oracle_action(
        scene, field, agent, episode.success_radius, config.kinematics);

    AgentState next = step(scene, agent, rec.action, config.kinematics);
    if (rec.action == DiscreteAction::MoveForward && !next.collided) {
      // Negative evidence: the agent physically swept this segment, so
      // any obstacle marks on it were projection artifacts. Without
      // this retraction, artifact cells accumulate until the believed
      // map walls off regions that are actually open.
      EpisodicPose to = next.episodic();
      double seg = std::hypot(to.x - pose.x, to.y - pose.y);
      int samples =
          std::max(1, int(std::ceil(seg / (0.5 * config.map.resolution))));
      for (int s = 0; s <= samples; ++s) {
        double f = double(s) / samples;
        EpisodicPose p{pose.x + f * (to.x - pose.x),
                       pose.y + f * (to.y - pose.y), 0.0};
        grid.clear_obstacle(pose_to_cell(p, config.map));
      }
    }
    if (next.collided && next.block_distance > 0.0) {
      // Blocked forward moves reveal an unseen obstacle: feed the cell
      // of the blocking sample back into the map as a one-column
      // reading, or the planner would keep routing through it.
      CameraModel forward_ray{1, 0.0, 0.0, 2.0 * config.kinematics.forward_step};
      // A sample that rounds into the agent's own cell is useless: the
      // planner treats that cell as free by definition. Push the depth
      // until it lands in the next cell along the heading, which the
      // blocking wall occupies.
      double bd = next.block_distance;
      CellIndex agent_cell = pose_to_cell(pose, config.map);
      for (int push = 0; push < 6; ++push) {
        EpisodicPose bp{pose.x + bd * std::cos(pose.yaw),
                        pose.y + bd * std::sin(pose.yaw), 0.0};
        CellIndex bc = pose_to_cell(bp, config.map);
        if (bc.i != agent_cell.i || bc.j != agent_cell.j) break;
        bd += 0.5 * config.map.resolution;
      }
      double bx = agent.world.x + bd * std::cos(agent.world.yaw);
      double by = agent.world.y + bd * std::sin(agent.world.yaw);
      int label = 0;
      if (scene.in_bounds(bx, by)) {
        CellIndex bc = scene.cell_of(bx, by);
        label = std::max(0, scene.label(bc.i, bc.j));
      }
      Observation bump;
      bump.t = t;
      bump.pose = pose;
      bump.depth = {bd};
      bump.labels = {label};
      grid.project_observation(bump, forward_ray);
      have_waypoint = false; // the map changed under the plan
      // Rejections recorded before this collision were judged against a
      // map that lacked this obstacle; drop them rather than let stale
      // avoid cells accumulate into a believed enclosure.
      avoid = BinaryGrid();
    }
    rec.dist_after = field.meters_at(next.world);
    log.result.path_length +=
        std::hypot(next.world.x - agent.world.x, next.world.y - agent.world.y);
    agent = next;

    bool stopping = rec.action == DiscreteAction::Stop;
    rec.done = stopping || t + 1 == episode.max_steps;
    rec.success =
        stopping && check_success(field, agent, episode.success_radius);
    rec.reward = step_reward(rec, config.reward);
    log.steps.push_back(rec);
    if (stopping) break;
  }

  log.result.success = !log.steps.empty() && log.steps.back().success;
  log.result.final_distance = field.meters_at(agent.world);
  return log;
}

std::string metrics_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["spl"] = m.spl;
  j["softspl"] = m.softspl;
  j["distance_to_goal"] = m.distance_to_goal;
  j["success_rate"] = m.success_rate;
  return j.dump();
}

BatchReport run_batch(const RunConfig& config) {
  BatchReport report;
  std::vector<EpisodeResult> results;
  for (int k = 0; k < config.episodes; ++k) {
    std::uint64_t seed = episode_seed(config.seed, k);
    Scenario scenario = generate_scene(seed, config.gen);
    auto policy = make_policy(config.policy, config.repr, mix64(seed),
                              &scenario, config.rho_max);
    EpisodeLog log = run_episode(config, scenario, *policy, seed);
    results.push_back(log.result);
    report.episodes.push_back(std::move(log));
  }
  report.metrics = aggregate(results);

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream rep(std::filesystem::path(config.out_dir) / "report.json");
    rep << metrics_to_json(report.metrics) << "\n";
    std::ofstream eps(std::filesystem::path(config.out_dir) /
                      "episodes.jsonl");
    for (const auto& log : report.episodes) {
      eps << log.to_json_line() << "\n";
    }
  }
  return report;
}

}  // namespace objnav
