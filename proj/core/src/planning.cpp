#include "objnav/planning.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <queue>
#include <string>

namespace objnav {

std::uint64_t g_astar_calls = 0;
std::uint64_t g_astar_expansions = 0;
std::uint64_t g_astar_floods = 0;
std::uint64_t g_astar_flood_exp = 0;

const char* to_string(DiscreteAction a) {
  switch (a) {
    case DiscreteAction::Stop: return "STOP";
    case DiscreteAction::MoveForward: return "MOVE_FORWARD";
    case DiscreteAction::TurnLeft: return "TURN_LEFT";
    case DiscreteAction::TurnRight: return "TURN_RIGHT";
  }
  return "?";
}

DiscreteAction action_from_string(const std::string& s) {
  if (s == "STOP") return DiscreteAction::Stop;
  if (s == "MOVE_FORWARD") return DiscreteAction::MoveForward;
  if (s == "TURN_LEFT") return DiscreteAction::TurnLeft;
  if (s == "TURN_RIGHT") return DiscreteAction::TurnRight;
  throw std::invalid_argument("unknown action: " + s);
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr int kDi[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
constexpr int kDj[8] = {0, 0, -1, 1, -1, 1, -1, 1};

double octile(int di, int dj) {
  int a = std::abs(di), b = std::abs(dj);
  int lo = std::min(a, b);
  return (a + b - 2 * lo) + lo * kSqrt2;
}

struct OpenEntry {
  double f;
  double g;
  int node;
  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    return g < o.g; // prefer larger g on equal f
  }
};

}  // namespace

namespace {

// Nearest free cell to `goal` by expanding Chebyshev rings; Euclidean
// metric, ties by lowest (i, j). Returns false on an all-occupied grid.
bool nearest_free_cell(const BinaryGrid& occ, CellIndex goal,
                       CellIndex& out) {
  const int max_r = std::max(occ.rows, occ.cols);
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= max_r; ++r) {
    if (double(r) * r > best_d2) break;
    int i0 = goal.i - r, i1 = goal.i + r;
    int j0 = goal.j - r, j1 = goal.j + r;
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        if (r > 0 && i != i0 && i != i1 && j != j0 && j != j1) continue;
        if (!occ.in_bounds(i, j) || occ.occupied(i, j)) continue;
        double d2 = double(i - goal.i) * (i - goal.i) +
                    double(j - goal.j) * (j - goal.j);
        if (d2 < best_d2) {
          best_d2 = d2;
          out = {i, j};
        }
      }
    }
  }
  return std::isfinite(best_d2);
}

// Per-thread scratch for the search, epoch-stamped so repeated calls on
// a large grid skip the O(n) reinitialization.
struct SearchScratch {
  std::vector<double> g;
  std::vector<int> parent;
  std::vector<std::uint32_t> stamp;
  std::vector<std::uint8_t> closed;
  std::vector<int> closed_list;
  std::uint32_t epoch = 0;

  void prepare(std::size_t n) {
    if (stamp.size() < n) { // grow-only: epoch stamping handles reuse
      g.resize(n);
      parent.resize(n);
      closed.resize(n);
      stamp.resize(n, 0);
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
    closed_list.clear();
  }
  void touch(int id) {
    if (stamp[id] != epoch) {
      stamp[id] = epoch;
      g[id] = std::numeric_limits<double>::infinity();
      parent[id] = -1;
      closed[id] = 0;
    }
  }
};

thread_local SearchScratch t_scratch;

// Epoch-stamped visited marks for the goal-side component flood.
struct FloodScratch {
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
  void prepare(std::size_t n) {
    if (stamp.size() < n) stamp.resize(n, 0); // grow-only
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }
  bool seen(int id) const { return stamp[id] == epoch; }
  void mark(int id) { stamp[id] = epoch; }
};

thread_local FloodScratch t_flood;

// Flood the goal's free component (same connectivity as the search) up
// to `cap` cells. Returns true when the component was exhausted without
// reaching `start`: the goal is provably unreachable and t_flood still
// stamps exactly its component.
bool goal_component_sealed(const BinaryGrid& occ, CellIndex goal,
                           CellIndex start, int cap) {
  const int cols = occ.cols;
  t_flood.prepare(std::size_t(occ.rows) * cols);
  std::vector<CellIndex> frontier{goal};
  t_flood.mark(goal.i * cols + goal.j);
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    if (int(frontier.size()) > cap) return false;
    const CellIndex c = frontier[head];
    if (c.i == start.i && c.j == start.j) return false;
    for (int k = 0; k < 8; ++k) {
      int ni = c.i + kDi[k], nj = c.j + kDj[k];
      if (!occ.in_bounds(ni, nj) || occ.occupied(ni, nj)) continue;
      if (k >= 4 && (occ.occupied(ni, c.j) || occ.occupied(c.i, nj))) continue;
      int nid = ni * cols + nj;
      if (t_flood.seen(nid)) continue;
      t_flood.mark(nid);
      frontier.push_back({ni, nj});
    }
  }
  return true;
}

// Nearest free cell to `goal` outside the component t_flood just
// stamped. Euclidean, ties by lowest (i, j). The scan radius is capped:
// the pocket this handles is small, so its rim is nearby; anything
// farther is left to the regular search and its fallback.
bool nearest_free_outside_pocket(const BinaryGrid& occ, CellIndex goal,
                                 CellIndex& out) {
  const int cols = occ.cols;
  const int max_r = 96;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= max_r; ++r) {
    if (double(r) * r > best_d2) break;
    int i0 = goal.i - r, i1 = goal.i + r;
    int j0 = goal.j - r, j1 = goal.j + r;
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        if (i != i0 && i != i1 && j != j0 && j != j1) continue;
        if (!occ.in_bounds(i, j) || occ.occupied(i, j)) continue;
        if (t_flood.seen(i * cols + j)) continue;
        double d2 = double(i - goal.i) * (i - goal.i) +
                    double(j - goal.j) * (j - goal.j);
        if (d2 < best_d2) {
          best_d2 = d2;
          out = {i, j};
        }
      }
    }
  }
  return std::isfinite(best_d2);
}

// `weight` > 0 inflates the heuristic (bounded-suboptimal search): the
// local planner trades exact path costs for far fewer expansions, while
// the public astar() keeps weight 0 and stays optimal.
// Breadth-first fallback for the weighted search: flood the start's
// free component without a heap and head for the goal, or for the
// reachable free cell nearest it (Euclidean, ties by lowest id) when
// the goal is out of reach. Hop-count paths are slightly suboptimal,
// which the local planner tolerates; the flood costs a fraction of
// letting A* exhaust its open list through the priority queue.
GridPath bfs_fallback(const BinaryGrid& occ, CellIndex start, CellIndex goal) {
  const int cols = occ.cols;
  const std::size_t n = std::size_t(occ.rows) * cols;
  SearchScratch& s = t_scratch;
  s.prepare(n);
  const int start_id = start.i * cols + start.j;
  const int goal_id = goal.i * cols + goal.j;
  s.touch(start_id);
  s.closed[start_id] = 1;
  std::vector<int>& q = s.closed_list; // doubles as the BFS queue
  q.push_back(start_id);
  double best_d2 = std::numeric_limits<double>::infinity();
  int best = -1;
  for (std::size_t head = 0; head < q.size(); ++head) {
    const int c = q[head];
    const int ci = c / cols, cj = c % cols;
    const double d2 = double(ci - goal.i) * (ci - goal.i) +
                      double(cj - goal.j) * (cj - goal.j);
    if (d2 < best_d2 || (d2 == best_d2 && c < best)) {
      best_d2 = d2;
      best = c;
    }
    if (c == goal_id) break;
    for (int k = 0; k < 8; ++k) {
      int ni = ci + kDi[k], nj = cj + kDj[k];
      if (!occ.in_bounds(ni, nj) || occ.occupied(ni, nj)) continue;
      if (k >= 4 && (occ.occupied(ni, cj) || occ.occupied(ci, nj))) continue;
      int nid = ni * cols + nj;
      s.touch(nid);
      if (s.closed[nid]) continue;
      s.closed[nid] = 1;
      s.parent[nid] = c;
      q.push_back(nid);
    }
  }
  GridPath path;
  for (int c = best; c != -1; c = s.parent[c]) {
    path.cells.push_back({c / cols, c % cols});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t k = 1; k < path.cells.size(); ++k) {
    const auto& a = path.cells[k - 1];
    const auto& b = path.cells[k];
    if (a.i != b.i && a.j != b.j)
      ++path.diagonal;
    else
      ++path.straight;
  }
  return path;
}

GridPath astar_impl(const BinaryGrid& occ, CellIndex start, CellIndex goal,
                    bool allow_seal_shortcut, double weight = 0.0) {
  if (!occ.in_bounds(start.i, start.j)) {
    throw PlanningError("astar: start out of bounds");
  }
  if (occ.occupied(start.i, start.j)) {
    throw TrappedAgentError("astar: start cell occupied");
  }
  goal.i = std::clamp(goal.i, 0, occ.rows - 1);
  goal.j = std::clamp(goal.j, 0, occ.cols - 1);
  if (occ.occupied(goal.i, goal.j)) {
    // Retarget to the nearest free cell before searching; if that cell
    // turns out unreachable the fallback below still applies.
    CellIndex free_goal;
    if (nearest_free_cell(occ, goal, free_goal)) goal = free_goal;
  }
  const bool goal_free = !occ.occupied(goal.i, goal.j);

  // A goal sealed inside a small believed pocket would otherwise make
  // the search flood the agent's whole component before giving up.
  // Detect the seal from the goal side (cheap) and aim for the nearest
  // free cell outside the pocket instead.
  // Small cap: the check exists for pockets of projection artifacts,
  // which are tiny; a goal in open space hits the cap almost instantly
  // and the cost stays negligible per call.
  constexpr int kSealCap = 256;
  if (allow_seal_shortcut && goal_free &&
      !(start.i == goal.i && start.j == goal.j) &&
      goal_component_sealed(occ, goal, start, kSealCap)) {
    CellIndex sub;
    if (nearest_free_outside_pocket(occ, goal, sub)) {
      return astar_impl(occ, start, sub, false, weight);
    }
  }
  const double h_scale = 1.0 + weight;

  const int cols = occ.cols;
  const std::size_t n = std::size_t(occ.rows) * cols;
  auto id = [cols](int i, int j) { return i * cols + j; };
  SearchScratch& s = t_scratch;
  s.prepare(n);

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  const int start_id = id(start.i, start.j);
  const int goal_id = id(goal.i, goal.j);
  s.touch(start_id);
  s.g[start_id] = 0.0;
  open.push(
      {h_scale * octile(goal.i - start.i, goal.j - start.j), 0.0, start_id});

  // The weighted search gets an expansion budget. Exhausting it means
  // the goal is unreachable or hidden behind a deep detour, and the
  // search is about to drag its whole free component through the heap;
  // a plain flood settles either case at a fraction of the cost.
  const std::size_t budget =
      weight > 0.0
          ? std::size_t(8.0 * octile(goal.i - start.i, goal.j - start.j)) + 2048
          : std::numeric_limits<std::size_t>::max();

  int found = -1;
  while (!open.empty()) {
    if (s.closed_list.size() > budget) {
      return bfs_fallback(occ, start, goal);
    }
    OpenEntry e = open.top();
    open.pop();
    if (s.closed[e.node]) continue;
    s.closed[e.node] = 1;
    s.closed_list.push_back(e.node);
    if (goal_free && e.node == goal_id) {
      found = e.node;
      break;
    }
    int ci = e.node / cols, cj = e.node % cols;
    for (int k = 0; k < 8; ++k) {
      int ni = ci + kDi[k], nj = cj + kDj[k];
      if (!occ.in_bounds(ni, nj) || occ.occupied(ni, nj)) continue;
      // No corner cutting: a diagonal move needs both orthogonal
      // neighbors free, or the path threads through solid geometry.
      if (k >= 4 && (occ.occupied(ni, cj) || occ.occupied(ci, nj))) continue;
      int nid = id(ni, nj);
      s.touch(nid);
      if (s.closed[nid]) continue;
      double ng = e.g + (k < 4 ? 1.0 : kSqrt2);
      if (ng < s.g[nid]) {
        s.g[nid] = ng;
        s.parent[nid] = e.node;
        open.push({ng + h_scale * octile(goal.i - ni, goal.j - nj), ng, nid});
      }
    }
  }

  ++g_astar_calls;
  g_astar_expansions += s.closed_list.size();
  if (found < 0) {
    ++g_astar_floods;
    g_astar_flood_exp += s.closed_list.size();
    // Goal occupied or unreachable: fall back to the reachable free cell
    // nearest the goal (Euclidean, ties by lowest (i, j)). The search
    // above has already finalized optimal costs for every reachable cell.
    double best_d2 = std::numeric_limits<double>::infinity();
    int best = -1;
    for (int c : s.closed_list) {
      int ci = c / cols, cj = c % cols;
      double d2 = double(ci - goal.i) * (ci - goal.i) +
                  double(cj - goal.j) * (cj - goal.j);
      if (d2 < best_d2 ||
          (d2 == best_d2 && best >= 0 && c < best)) {
        best_d2 = d2;
        best = c;
      }
    }
    if (s.closed_list.size() <= 1 && goal_id != start_id) {
      throw TrappedAgentError("astar: no free cell reachable");
    }
    found = best;
  }

  GridPath path;
  for (int c = found; c != -1; c = s.parent[c]) {
    path.cells.push_back({c / cols, c % cols});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t k = 1; k < path.cells.size(); ++k) {
    const auto& a = path.cells[k - 1];
    const auto& b = path.cells[k];
    if (a.i != b.i && a.j != b.j)
      ++path.diagonal;
    else
      ++path.straight;
  }
  return path;
}

}  // namespace

GridPath astar(const BinaryGrid& occ, CellIndex start, CellIndex goal) {
  return astar_impl(occ, start, goal, true);
}

namespace {

// Size of the free 8-connected component containing `from`, counted up
// to `cap` (the flood stops there, so the return value saturates).
int free_component_size(const BinaryGrid& occ, CellIndex from, int cap) {
  const int cols = occ.cols;
  t_flood.prepare(std::size_t(occ.rows) * cols);
  std::vector<CellIndex> comp{from};
  t_flood.mark(from.i * cols + from.j);
  for (std::size_t head = 0;
       head < comp.size() && int(comp.size()) < cap; ++head) {
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        int ni = comp[head].i + di, nj = comp[head].j + dj;
        if (!occ.in_bounds(ni, nj) || occ.occupied(ni, nj)) continue;
        int nid = ni * cols + nj;
        if (t_flood.seen(nid)) continue;
        t_flood.mark(nid);
        comp.push_back({ni, nj});
      }
    }
  }
  return int(comp.size());
}

// Chebyshev dilation by `radius` cells. Keeps paths far enough from
// mapped obstacles that the controller's 15-degree deadband cannot
// drift the agent into them between waypoints.
BinaryGrid dilate(const BinaryGrid& occ, int radius) {
  if (radius <= 0) return occ;
  BinaryGrid out(occ.rows, occ.cols);
  for (int i = 0; i < occ.rows; ++i) {
    for (int j = 0; j < occ.cols; ++j) {
      if (!occ.occupied(i, j)) continue;
      int i0 = std::max(0, i - radius), i1 = std::min(occ.rows - 1, i + radius);
      int j0 = std::max(0, j - radius), j1 = std::min(occ.cols - 1, j + radius);
      for (int a = i0; a <= i1; ++a)
        for (int b = j0; b <= j1; ++b) out.set(a, b);
    }
  }
  return out;
}

}  // namespace

PolarGoal local_goal(const SemanticGrid& grid, const EpisodicPose& agent,
                     CellIndex global_goal, double lookahead_m,
                     const ControllerParams& ctrl, double forward_step_m,
                     double turn_step, BinaryGrid* avoid) {
  const MapSpec& spec = grid.spec();
  BinaryGrid occ(spec.size_cells, spec.size_cells);
  auto ch = grid.channel(SemanticGrid::kOccupationChannel);
  std::copy(ch.begin(), ch.end(), occ.cells.begin());
  // Cells the agent has stood on are known traversable whatever the
  // projection marked there since.
  auto trail = grid.channel(SemanticGrid::kTrailChannel);
  for (std::size_t c = 0; c < trail.size(); ++c) {
    occ.cells[c] = std::uint8_t(occ.cells[c] & ~trail[c]);
  }

  CellIndex start = pose_to_cell(agent, spec);
  occ.set(start.i, start.j, false); // the agent's own cell is never an obstacle
  if (avoid && avoid->rows == 0) {
    *avoid = BinaryGrid(spec.size_cells, spec.size_cells);
  }

  // The controller moves along its quantized yaw, not along the grid
  // path, so a waypoint is only usable if the forward move it will
  // eventually command stays clear of mapped obstacles. Check that by
  // simulating the controller's turn-then-advance against the map.
  auto forward_clear = [&](double yaw) {
    const int samples =
        std::max(1, int(std::ceil(forward_step_m / (0.5 * spec.resolution))));
    for (int s = 1; s <= samples; ++s) {
      double d = forward_step_m * s / samples;
      EpisodicPose p{agent.x + d * std::cos(yaw), agent.y + d * std::sin(yaw),
                     0.0};
      CellIndex c = pose_to_cell(p, spec);
      if (c.i == start.i && c.j == start.j) continue;
      if (occ.occupied(c.i, c.j)) return false;
    }
    return true;
  };
  auto approachable = [&](const PolarGoal& g) {
    if (g.rho <= ctrl.stop_radius) return true;
    double bearing = wrap_angle(agent.yaw + g.phi);
    double yaw = agent.yaw;
    for (int it = 0; it < 12; ++it) {
      double phi = wrap_angle(bearing - yaw);
      if (std::abs(phi) <= ctrl.turn_threshold) return forward_clear(yaw);
      yaw = wrap_angle(yaw + (phi > 0 ? turn_step : -turn_step));
    }
    return false;
  };

  auto dist2_to_goal = [&](const CellIndex& c) {
    double di = c.i - global_goal.i, dj = c.j - global_goal.j;
    return di * di + dj * dj;
  };
  const double lookahead_cells = lookahead_m / spec.resolution;
  auto collect = [&](const GridPath& p) {
    std::vector<CellIndex> out;
    double cum = 0.0;
    for (std::size_t k = 1; k < p.cells.size(); ++k) {
      const auto& a = p.cells[k - 1];
      const auto& b = p.cells[k];
      cum += (a.i != b.i && a.j != b.j) ? kSqrt2 : 1.0;
      out.push_back(p.cells[k]);
      if (cum >= lookahead_cells) break;
    }
    return out;
  };

  // A waypoint inside the stop radius reads as an arrival downstream,
  // so only the end of a path that actually made it to the goal may
  // produce one; anything else inside that radius is just a detour
  // cell and must not halt the agent. Returns the farthest waypoint the
  // controller can approach safely, if any; rejected cells accumulate
  // in `failed`.
  std::vector<CellIndex> failed;
  auto select = [&](const GridPath& p, const std::vector<CellIndex>& cands,
                    bool reaches_goal, PolarGoal& out) {
    for (std::size_t k = cands.size(); k-- > 0;) {
      PolarGoal g = cell_to_episodic_polar(agent, cands[k], spec);
      if (g.rho <= ctrl.stop_radius) {
        bool is_dest = cands[k].i == p.destination().i &&
                       cands[k].j == p.destination().j;
        if (!(is_dest && reaches_goal)) continue;
      }
      if (approachable(g)) {
        out = g;
        return true;
      }
      failed.push_back(cands[k]);
    }
    return false;
  };

  // Destination farther than this from the goal triggers the
  // unmargined replan below.
  constexpr double kFallbackTol = 8.0 * 8.0; // cells^2
  // Arrival needs a much tighter bound: the goal cell itself may be
  // marked occupied (so A* retargets a neighbor), but anything beyond
  // a couple of cells can sit on the far side of a wall, and stopping
  // there would claim an arrival the agent never made.
  constexpr double kArrivalTol = 2.0 * 2.0; // cells^2
  constexpr int kMargin = 2;
  // Heuristic inflation for the waypoint searches: slightly suboptimal
  // paths are fine here and the search expands far fewer cells.
  constexpr double kLocalWeight = 1.0;
  std::vector<CellIndex> candidates;
  bool at_goal = false;

  // The search itself runs on a window: the bounding box of everything
  // believed occupied plus the start and goal, padded enough for the
  // inflation and for routes around obstacles hugging the box. All
  // cells outside the box are unobserved (free), so confining the
  // search there loses no route and keeps A* off the full 512x512 grid.
  const int n_cells = spec.size_cells;
  int bi0 = start.i, bi1 = start.i, bj0 = start.j, bj1 = start.j;
  bi0 = std::min(bi0, global_goal.i);
  bi1 = std::max(bi1, global_goal.i);
  bj0 = std::min(bj0, global_goal.j);
  bj1 = std::max(bj1, global_goal.j);
  auto scan_bbox = [&](const std::vector<std::uint8_t>& cells) {
    const int words = n_cells / 8;
    for (int i = 0; i < n_cells; ++i) {
      const std::uint8_t* row = &cells[std::size_t(i) * n_cells];
      bool any = false;
      for (int w = 0; w < words; ++w) {
        std::uint64_t v;
        std::memcpy(&v, row + 8 * w, 8);
        if (v) {
          any = true;
          break;
        }
      }
      if (!any) continue;
      bi0 = std::min(bi0, i);
      bi1 = std::max(bi1, i);
      int j = 0;
      while (!row[j]) ++j;
      bj0 = std::min(bj0, j);
      j = n_cells - 1;
      while (!row[j]) --j;
      bj1 = std::max(bj1, j);
    }
  };
  scan_bbox(occ.cells);
  if (avoid) scan_bbox(avoid->cells);
  constexpr int kWindowPad = 8;
  const int wi0 = std::max(0, bi0 - kWindowPad);
  const int wj0 = std::max(0, bj0 - kWindowPad);
  const int wi1 = std::min(n_cells - 1, bi1 + kWindowPad);
  const int wj1 = std::min(n_cells - 1, bj1 + kWindowPad);
  const int w_rows = wi1 - wi0 + 1, w_cols = wj1 - wj0 + 1;
  auto to_sub = [&](const CellIndex& c) {
    return CellIndex{c.i - wi0, c.j - wj0};
  };
  auto to_global = [&](GridPath& p) {
    for (auto& c : p.cells) {
      c.i += wi0;
      c.j += wj0;
    }
  };
  const CellIndex sub_start = to_sub(start);
  const CellIndex sub_goal = to_sub(global_goal);

  // Rejected waypoints are written into the avoid overlay and the plan
  // recomputed without them; across steps this steers the planner off
  // squeezes the controller cannot thread, instead of letting it
  // oscillate in front of one.
  for (int attempt = 0; attempt < 3; ++attempt) {
    BinaryGrid base(w_rows, w_cols);
    for (int i = 0; i < w_rows; ++i) {
      const std::uint8_t* src = &occ.cells[std::size_t(wi0 + i) * n_cells + wj0];
      std::uint8_t* dst = &base.cells[std::size_t(i) * w_cols];
      std::copy(src, src + w_cols, dst);
      if (avoid) {
        const std::uint8_t* asrc =
            &avoid->cells[std::size_t(wi0 + i) * n_cells + wj0];
        for (int j = 0; j < w_cols; ++j) dst[j] = std::uint8_t(dst[j] | asrc[j]);
      }
    }
    base.set(sub_start.i, sub_start.j, false);

    // Plan with a 2-cell (0.1 m) safety margin so the controller's
    // 15-degree deadband cannot drift the agent into a mapped obstacle
    // between waypoints. The margin drops to 1 cell in a small disc
    // around the agent, or it would wall in an agent that is already
    // closer to an obstacle than the margin allows.
    BinaryGrid inflated = dilate(base, kMargin);
    BinaryGrid near_start = dilate(base, 1);
    for (int i = sub_start.i - kMargin; i <= sub_start.i + kMargin; ++i) {
      for (int j = sub_start.j - kMargin; j <= sub_start.j + kMargin; ++j) {
        if (base.in_bounds(i, j)) inflated.set(i, j, near_start.occupied(i, j));
      }
    }
    inflated.set(sub_start.i, sub_start.j, false);

    // Ray endpoints round to either side of a cell boundary, so the map
    // can carry spurious obstacle cells hugging real walls; in a tight
    // spot those can wall the agent in on the planning grid even though
    // it physically has room. Retry with less margin before declaring
    // the agent trapped.
    GridPath path;
    bool planned = false;
    try {
      path = astar_impl(inflated, sub_start, sub_goal, true, kLocalWeight);
      planned = true;
    } catch (const TrappedAgentError&) {
    }
    if (!planned) {
      BinaryGrid one = near_start;
      one.set(sub_start.i, sub_start.j, false);
      try {
        path = astar_impl(one, sub_start, sub_goal, true, kLocalWeight);
        planned = true;
      } catch (const TrappedAgentError&) {
      }
    }
    if (!planned) {
      try {
        path = astar_impl(base, sub_start, sub_goal, true, kLocalWeight);
        planned = true;
      } catch (const TrappedAgentError&) {
      }
    }
    if (!planned) {
      BinaryGrid loose = base;
      for (int i = sub_start.i - 1; i <= sub_start.i + 1; ++i)
        for (int j = sub_start.j - 1; j <= sub_start.j + 1; ++j)
          if (loose.in_bounds(i, j)) loose.set(i, j, false);
      path = astar_impl(loose, sub_start, sub_goal, true, kLocalWeight);
    }
    to_global(path);

    // The margin can transiently disconnect the goal (a partially
    // mapped doorway sealed by inflation), leaving a fallback
    // destination next to the agent; stopping there would be wrong.
    // Retry on the unmargined map and keep whichever plan ends nearer
    // the goal.
    double dest_d2 = dist2_to_goal(path.destination());
    GridPath margin_path = path; // the plan that kept the safety margin
    if (dest_d2 > kFallbackTol) {
      try {
        GridPath raw = astar_impl(base, sub_start, sub_goal, true, kLocalWeight);
        to_global(raw);
        double raw_d2 = dist2_to_goal(raw.destination());
        if (raw_d2 < dest_d2) {
          path = raw;
          dest_d2 = raw_d2;
        }
      } catch (const TrappedAgentError&) {
      }
    }
    // Arrival, when the destination stopped short of the goal cell:
    // either it stopped just next to it, or the goal cell itself is
    // mapped occupied (the goal sits on the target's own obstacle
    // footprint, so A* retargets the blob's edge). A farther believed-
    // free goal means a wall separates the agent from it — that is not
    // an arrival, however close it looks in a straight line.
    at_goal = dest_d2 <= kArrivalTol ||
              (dest_d2 <= kFallbackTol &&
               occ.in_bounds(global_goal.i, global_goal.j) &&
               occ.occupied(global_goal.i, global_goal.j));
    // 0.8 m: close enough that stopping at the rim still lands well
    // inside the 1.0 m success radius when the pocket is spurious.
    constexpr double kPocketTol = 16.0 * 16.0; // cells^2
    if (!at_goal && dest_d2 <= kPocketTol) {
      // Goal believed free but unreachable. If its free region is a
      // small pocket, spurious boundary marks sealed it off and the
      // destination at its rim is an arrival; a large region means a
      // real wall with another room behind it, and stopping here would
      // claim an arrival the agent never made.
      constexpr int kPocketLimit = 64; // cells
      at_goal = free_component_size(occ, global_goal, kPocketLimit) <
                kPocketLimit;
    }
    if (!at_goal) {
      // The complementary enclosure: artifacts can also seal the agent
      // itself into a small believed pocket. A real room always keeps
      // its doorway believed-free (the agent drove in through it), so a
      // small sealed component can only be artifacts; push one step
      // past the rim and let traversal or collision feedback settle it.
      constexpr int kStartPocketLimit = 200; // cells
      if (free_component_size(occ, start, kStartPocketLimit) <
          kStartPocketLimit) {
        PolarGoal g = cell_to_episodic_polar(agent, path.destination(), spec);
        g.rho = std::max(g.rho, ctrl.stop_radius + spec.resolution) +
                forward_step_m;
        return g;
      }
    }
    candidates = collect(path);
    if (candidates.empty()) break;
    PolarGoal g;
    failed.clear();
    if (select(path, candidates, at_goal, g)) return g;

    // The goal-reaching plan may hug mapped obstacles too closely for
    // the controller; the margin-keeping plan detours around them, so
    // try its waypoints too.
    if (margin_path.cells != path.cells) {
      std::vector<CellIndex> mc = collect(margin_path);
      if (!mc.empty() && select(margin_path, mc, false, g)) return g;
    }

    if (!avoid) break;
    bool added = false;
    for (const auto& c : failed) {
      if (!avoid->occupied(c.i, c.j)) {
        avoid->set(c.i, c.j);
        added = true;
      }
    }
    if (!added) break;
  }
  if (candidates.empty()) {
    // A trivial path at the goal is an arrival; anywhere else it means
    // the believed map walls the agent in, so turn in place to gather
    // fresh observations instead of reading it as a stop.
    if (at_goal) return cell_to_episodic_polar(agent, start, spec);
    return {forward_step_m, kPi};
  }

  // No waypoint survives the check: every usable one sits behind a
  // mapped obstacle from the poses the controller can reach. Escape by
  // advancing along the clear lattice heading closest to the path
  // direction; one step out of the pocket usually unblocks replanning.
  PolarGoal along = cell_to_episodic_polar(agent, candidates.back(), spec);
  double want = wrap_angle(agent.yaw + along.phi);
  double best_dev = std::numeric_limits<double>::infinity();
  double escape_yaw = 0.0;
  for (int m = -5; m <= 6; ++m) {
    double yaw = wrap_angle(agent.yaw + m * turn_step);
    if (!forward_clear(yaw)) continue;
    double dev = std::abs(wrap_angle(yaw - want));
    if (dev < best_dev) {
      best_dev = dev;
      escape_yaw = yaw;
    }
  }
  if (std::isfinite(best_dev)) {
    return {forward_step_m + ctrl.stop_radius,
            wrap_angle(escape_yaw - agent.yaw)};
  }
  // Boxed in on every heading; head for the farthest waypoint and let
  // the collision feedback refine the map, keeping the goal outside
  // the stop radius so a detour cell cannot read as an arrival.
  if (!at_goal) {
    along.rho = std::max(along.rho, ctrl.stop_radius + spec.resolution);
  }
  return along;
}

DiscreteAction local_planner_step(const PolarGoal& goal,
                                  const ControllerParams& params) {
  if (goal.rho <= params.stop_radius) return DiscreteAction::Stop;
  if (goal.phi > params.turn_threshold) return DiscreteAction::TurnLeft;
  if (goal.phi < -params.turn_threshold) return DiscreteAction::TurnRight;
  return DiscreteAction::MoveForward;
}

}  // namespace objnav
