#ifndef OBJNAV_PLANNING_HPP_
#define OBJNAV_PLANNING_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "objnav/geometry.hpp"
#include "objnav/semantic_map.hpp"

namespace objnav {

enum class DiscreteAction { Stop, MoveForward, TurnLeft, TurnRight };

const char* to_string(DiscreteAction a);
DiscreteAction action_from_string(const std::string& s);

struct PlanningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Start cell occupied, or no free cell reachable from it.
struct TrappedAgentError : PlanningError {
  using PlanningError::PlanningError;
};

/// Binary occupancy grid, row-major, 1 = blocked.
struct BinaryGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;

  BinaryGrid() = default;
  BinaryGrid(int r, int c) : rows(r), cols(c), cells(std::size_t(r) * c, 0) {}

  bool in_bounds(int i, int j) const {
    return i >= 0 && i < rows && j >= 0 && j < cols;
  }
  bool occupied(int i, int j) const {
    return cells[std::size_t(i) * cols + j] != 0;
  }
  void set(int i, int j, bool v = true) {
    cells[std::size_t(i) * cols + j] = v ? 1 : 0;
  }
};

/// 8-connected grid path, start first. Cost is straight moves at 1 plus
/// diagonal moves at sqrt(2).
struct GridPath {
  std::vector<CellIndex> cells;
  int straight = 0;
  int diagonal = 0;

  double cost() const { return straight + diagonal * std::sqrt(2.0); }
  const CellIndex& destination() const { return cells.back(); }
};

/// A* over free cells with the octile heuristic. If the goal is occupied
/// or unreachable, plans instead to the reachable free cell nearest the
/// goal (Euclidean, ties by lowest (i, j)).
///
/// Throws TrappedAgentError when the start is occupied or no other free
/// cell can be reached while the goal lies elsewhere.
GridPath astar(const BinaryGrid& occupancy, CellIndex start, CellIndex goal);

struct ControllerParams {
  double turn_threshold = 15.0 * kPi / 180.0; // radians
  // Must exceed half the 0.25 m forward step: with a smaller radius an
  // aligned approach can overshoot between d and 0.25 - d indefinitely.
  double stop_radius = 0.15;                  // meters
};

/// Short-horizon waypoint toward the global goal, as a polar goal in the
/// agent's frame. Plans on the occupation channel with the agent's own
/// cell exempted, then picks the farthest path waypoint within
/// lookahead_m that the downstream controller can approach without its
/// next forward move crossing a mapped obstacle (the controller drives
/// along a 30-degree yaw lattice, not along the grid path, so this is
/// checked by simulating it against the map).
///
/// `avoid` is an optional caller-owned overlay, sized like the map.
/// Cells the check rejects are recorded there and treated as blocked in
/// later plans; keeping it across steps stops the planner from
/// re-proposing a squeeze the controller cannot thread, which otherwise
/// ends in an oscillation between two stances in front of it.
PolarGoal local_goal(const SemanticGrid& grid, const EpisodicPose& agent,
                     CellIndex global_goal, double lookahead_m = 0.5,
                     const ControllerParams& ctrl = {},
                     double forward_step_m = 0.25,
                     double turn_step = 30.0 * kPi / 180.0,
                     BinaryGrid* avoid = nullptr);

/// Deterministic point-goal controller over the discrete action set.
DiscreteAction local_planner_step(const PolarGoal& goal,
                                  const ControllerParams& params = {});

}  // namespace objnav

#endif  // OBJNAV_PLANNING_HPP_
