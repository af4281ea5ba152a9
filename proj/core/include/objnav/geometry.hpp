#ifndef OBJNAV_GEOMETRY_HPP_
#define OBJNAV_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace objnav {

inline constexpr double kPi = 3.14159265358979323846;

/// Normalize an angle to [-pi, pi].
inline double wrap_angle(double a) {
  if (a >= -kPi && a <= kPi) return a;
  return std::atan2(std::sin(a), std::cos(a));
}

/// Pose in the episode-anchored frame: x along the initial heading,
/// y to the left of it, yaw CCW-positive with 0 = initial heading.
struct EpisodicPose {
  double x = 0.0;   // meters
  double y = 0.0;   // meters
  double yaw = 0.0; // radians in [-pi, pi]
};

/// Geometry of the 512x512 top-down map at 0.05 m/cell, episodic origin
/// anchored at the center cell.
struct MapSpec {
  int size_cells = 512;
  double resolution = 0.05; // meters per cell
  int origin_i = 256;
  int origin_j = 256;

  double extent_m() const { return size_cells * resolution; }
  double half_extent_m() const { return 0.5 * extent_m(); }
};

/// Default rho scaling for the polar goal representation: half the map
/// extent, so any decoded goal lies on the map.
inline constexpr double kDefaultRhoMax = 12.8;

struct CellIndex {
  int i = 0;
  int j = 0;
  bool operator==(const CellIndex&) const = default;
};

struct PolarGoal {
  double rho = 0.0; // meters, >= 0
  double phi = 0.0; // radians in [-pi, pi], relative to agent heading
};

namespace detail {
// Round half away from zero, as lround does.
inline int round_cells(double v) { return static_cast<int>(std::lround(v)); }
}  // namespace detail

inline int clamp_cell(int c, const MapSpec& spec) {
  return std::clamp(c, 0, spec.size_cells - 1);
}

/// Map an episodic pose onto the grid. Out-of-extent poses clamp to the
/// border.
inline CellIndex pose_to_cell(const EpisodicPose& pose, const MapSpec& spec) {
  int i = spec.origin_i + detail::round_cells(pose.x / spec.resolution);
  int j = spec.origin_j + detail::round_cells(pose.y / spec.resolution);
  return {clamp_cell(i, spec), clamp_cell(j, spec)};
}

/// Center of a cell in episodic meters. Cells round-trip exactly through
/// pose_to_cell with this convention.
inline double cell_center_x(const CellIndex& c, const MapSpec& spec) {
  return (c.i - spec.origin_i) * spec.resolution;
}
inline double cell_center_y(const CellIndex& c, const MapSpec& spec) {
  return (c.j - spec.origin_j) * spec.resolution;
}

/// Decode a normalized [0,1]^2 prediction into map cell coordinates:
/// scale by the map size, round, clamp to [0, size-1].
inline CellIndex decode_cartesian(double u, double v,
                                  const MapSpec& spec = {}) {
  if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("decode_cartesian: prediction outside [0,1]");
  }
  int i = detail::round_cells(u * spec.size_cells);
  int j = detail::round_cells(v * spec.size_cells);
  return {clamp_cell(i, spec), clamp_cell(j, spec)};
}

/// Decode a normalized [0,1]^2 prediction into (rho, phi): rho scales
/// linearly to [0, rho_max], phi to [-pi, +pi].
inline PolarGoal decode_polar(double u, double v, double rho_max) {
  if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("decode_polar: prediction outside [0,1]");
  }
  if (!(rho_max > 0.0)) {
    throw std::invalid_argument("decode_polar: rho_max must be positive");
  }
  return {u * rho_max, v * 2.0 * kPi - kPi};
}

/// Place a polar goal (agent-relative) onto the grid.
inline CellIndex polar_goal_to_cell(const PolarGoal& goal,
                                    const EpisodicPose& agent,
                                    const MapSpec& spec) {
  double heading = agent.yaw + goal.phi;
  EpisodicPose target{agent.x + goal.rho * std::cos(heading),
                      agent.y + goal.rho * std::sin(heading), 0.0};
  return pose_to_cell(target, spec);
}

/// Express a target cell as a polar goal relative to the agent. Uses the
/// cell center, so polar_goal_to_cell inverts it exactly. Degenerate case
/// (agent already in the target cell) is defined as (0, 0).
inline PolarGoal cell_to_episodic_polar(const EpisodicPose& agent,
                                        const CellIndex& target,
                                        const MapSpec& spec) {
  if (pose_to_cell(agent, spec) == target) return {0.0, 0.0};
  double dx = cell_center_x(target, spec) - agent.x;
  double dy = cell_center_y(target, spec) - agent.y;
  return {std::hypot(dx, dy), wrap_angle(std::atan2(dy, dx) - agent.yaw)};
}

}  // namespace objnav

#endif  // OBJNAV_GEOMETRY_HPP_
