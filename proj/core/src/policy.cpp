#include "objnav/policy.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace objnav {

GoalRepresentation representation_from_string(const std::string& s) {
  if (s == "cartesian") return GoalRepresentation::Cartesian;
  if (s == "polar") return GoalRepresentation::Polar;
  throw std::invalid_argument("unknown representation: " + s);
}

const char* to_string(GoalRepresentation r) {
  return r == GoalRepresentation::Cartesian ? "cartesian" : "polar";
}

namespace {

/// Geodesic dilation radius of the trail defining "explored" space for
/// the frontier policy.
constexpr double kExploredRadiusM = 1.0;

/// Express a map-frame goal cell as a normalized prediction.
PolicyOutput encode_goal(CellIndex goal, const PolicyInput& in,
                         GoalRepresentation repr, const MapSpec& spec,
                         double rho_max) {
  PolicyOutput out;
  out.repr = repr;
  goal.i = clamp_cell(goal.i, spec);
  goal.j = clamp_cell(goal.j, spec);
  if (repr == GoalRepresentation::Cartesian) {
    out.pred = {double(goal.i) / spec.size_cells,
                double(goal.j) / spec.size_cells};
  } else {
    double di = double(goal.i - in.agent_cell.i) * spec.resolution;
    double dj = double(goal.j - in.agent_cell.j) * spec.resolution;
    double rho = std::hypot(di, dj);
    double phi = rho > 0.0 ? wrap_angle(std::atan2(dj, di) - in.yaw) : 0.0;
    out.pred = {std::clamp(rho / rho_max, 0.0, 1.0), (phi + kPi) / (2.0 * kPi)};
  }
  return out;
}

CellIndex crop_to_map(int u, int v, const PolicyInput& in) {
  return {in.agent_cell.i - MapCrop::kHalf + u,
          in.agent_cell.j - MapCrop::kHalf + v};
}

/// Nearest set cell of one crop channel to the crop center; ties go to
/// the lowest (u, v). Returns false when the channel is empty.
bool nearest_in_channel(const MapCrop& crop, int ch, int& best_u,
                        int& best_v) {
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int u = 0; u < MapCrop::kSize; ++u) {
    for (int v = 0; v < MapCrop::kSize; ++v) {
      if (!crop.at(ch, u, v)) continue;
      double d2 = double(u - MapCrop::kHalf) * (u - MapCrop::kHalf) +
                  double(v - MapCrop::kHalf) * (v - MapCrop::kHalf);
      if (d2 < best_d2) {
        best_d2 = d2;
        best_u = u;
        best_v = v;
        found = true;
      }
    }
  }
  return found;
}

}  // namespace

PolicyOutput RandomPolicy::step(const PolicyInput&) {
  auto unit = [this] { return (rng_() >> 11) * 0x1.0p-53; };
  return {{unit(), unit()}, repr_};
}

PolicyOutput FrontierPolicy::step(const PolicyInput& in) {
  // The map records obstacles and the agent's trail but not sensed-free
  // space, so "explored" is taken as the region within a fixed geodesic
  // radius of the trail (dilation through unoccupied cells only).
  // Frontier cells are the unoccupied cells on that dilation wavefront.
  const MapCrop& crop = in.crop;
  constexpr int N = MapCrop::kSize;
  const int radius =
      std::max(1, int(std::lround(kExploredRadiusM / spec_.resolution)));
  auto occupied = [&](int u, int v) {
    return crop.at(SemanticGrid::kOccupationChannel, u, v);
  };

  std::vector<std::int16_t> depth(std::size_t(N) * N, -1);
  std::vector<int> queue;
  queue.reserve(1024);
  for (int u = 0; u < N; ++u) {
    for (int v = 0; v < N; ++v) {
      if (crop.at(SemanticGrid::kTrailChannel, u, v) && !occupied(u, v)) {
        depth[u * N + v] = 0;
        queue.push_back(u * N + v);
      }
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int id = queue[head];
    int u = id / N, v = id % N;
    std::int16_t d = depth[id];
    if (d >= radius) continue;
    for (int du = -1; du <= 1; ++du) {
      for (int dv = -1; dv <= 1; ++dv) {
        int nu = u + du, nv = v + dv;
        if (nu < 0 || nu >= N || nv < 0 || nv >= N) continue;
        int nid = nu * N + nv;
        if (depth[nid] >= 0 || occupied(nu, nv)) continue;
        depth[nid] = std::int16_t(d + 1);
        queue.push_back(nid);
      }
    }
  }

  const double min_cells = min_range_m_ / spec_.resolution;
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_u = -1, best_v = -1;
  for (int u = 0; u < N; ++u) {
    for (int v = 0; v < N; ++v) {
      if (depth[u * N + v] != radius) continue;
      double d2 = double(u - MapCrop::kHalf) * (u - MapCrop::kHalf) +
                  double(v - MapCrop::kHalf) * (v - MapCrop::kHalf);
      if (d2 < best_d2 && d2 >= min_cells * min_cells) {
        best_d2 = d2;
        best_u = u;
        best_v = v;
      }
    }
  }
  if (best_u < 0) return {{0.5, 0.5}, repr_};
  return encode_goal(crop_to_map(best_u, best_v, in), in, repr_, spec_,
                     rho_max_);
}

PolicyOutput SeenTargetPolicy::step(const PolicyInput& in) {
  int u, v;
  if (in.target_class < 1 || in.target_class > SemanticGrid::kNumClasses) {
    throw std::invalid_argument("seen_target: target class outside 1..21");
  }
  if (nearest_in_channel(in.crop, in.target_class, u, v)) {
    return encode_goal(crop_to_map(u, v, in), in, repr_, spec_, rho_max_);
  }
  return frontier_.step(in);
}

PolicyOutput OracleGoalPolicy::step(const PolicyInput& in) {
  // Current agent position in world coordinates, via its map cell.
  EpisodicPose agent_ep{cell_center_x(in.agent_cell, spec_),
                        cell_center_y(in.agent_cell, spec_), 0.0};
  WorldPose agent_w = episodic_to_world(agent_ep, anchor_);

  // Candidate goals: the free scene cells bordering each instance
  // footprint (the footprint itself is solid and cannot be stood on).
  const int rows = scene_->rows(), cols = scene_->cols();
  std::vector<std::uint8_t> candidate(std::size_t(rows) * cols, 0);
  bool found = false;
  for (const auto& obj : scene_->objects()) {
    if (obj.class_id != in.target_class) continue;
    for (const auto& c : obj.cells) {
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          int ni = c.i + di, nj = c.j + dj;
          if (!scene_->in_bounds(ni, nj) || scene_->solid(ni, nj)) continue;
          candidate[std::size_t(ni) * cols + nj] = 1;
          found = true;
        }
      }
    }
  }
  if (!found) {
    throw std::invalid_argument("oracle: no target instance in scene");
  }

  // Take the candidate nearest the agent along the true free space, by
  // Dijkstra from the agent's cell; straight-line proximity would favor
  // a point on the wrong side of a wall. The walk stops at the first
  // candidate settled.
  CellIndex ac = scene_->cell_of(agent_w.x, agent_w.y);
  if (!scene_->in_bounds(ac.i, ac.j)) {
    throw std::invalid_argument("oracle: agent outside the scene");
  }
  constexpr int kDi[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  constexpr int kDj[8] = {0, 0, -1, 1, -1, 1, -1, 1};
  const double kSqrt2 = std::sqrt(2.0);
  std::vector<double> dist(std::size_t(rows) * cols,
                           std::numeric_limits<double>::infinity());
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> open;
  int start_id = ac.i * cols + ac.j;
  dist[start_id] = 0.0;
  open.push({0.0, start_id});
  int goal_id = -1;
  while (!open.empty()) {
    auto [d, id] = open.top();
    open.pop();
    if (d > dist[id]) continue;
    if (candidate[id]) {
      goal_id = id;
      break;
    }
    int ci = id / cols, cj = id % cols;
    for (int k = 0; k < 8; ++k) {
      int ni = ci + kDi[k], nj = cj + kDj[k];
      if (!scene_->in_bounds(ni, nj) || scene_->solid(ni, nj)) continue;
      int nid = ni * cols + nj;
      double nd = d + (k < 4 ? 1.0 : kSqrt2);
      if (nd < dist[nid]) {
        dist[nid] = nd;
        open.push({nd, nid});
      }
    }
  }
  if (goal_id < 0) {
    throw std::invalid_argument("oracle: target unreachable from agent");
  }
  double gx = scene_->cell_center_x(goal_id / cols);
  double gy = scene_->cell_center_y(goal_id % cols);
  EpisodicPose goal_ep = world_to_episodic({gx, gy, 0.0}, anchor_);
  return encode_goal(pose_to_cell(goal_ep, spec_), in, repr_, spec_,
                     rho_max_);
}

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    GoalRepresentation repr,
                                    std::uint64_t seed,
                                    const Scenario* scenario,
                                    double rho_max) {
  if (name == "random") return std::make_unique<RandomPolicy>(seed, repr);
  if (name == "frontier") {
    return std::make_unique<FrontierPolicy>(repr, MapSpec{}, 0.75, rho_max);
  }
  if (name == "seen_target") {
    return std::make_unique<SeenTargetPolicy>(repr, MapSpec{}, rho_max);
  }
  if (name == "oracle") {
    if (!scenario) {
      throw std::invalid_argument("oracle policy requires scene access");
    }
    return std::make_unique<OracleGoalPolicy>(scenario->scene,
                                              scenario->episode, repr,
                                              MapSpec{}, rho_max);
  }
  throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace objnav
