#ifndef OBJNAV_SIMULATOR_HPP_
#define OBJNAV_SIMULATOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "objnav/camera.hpp"
#include "objnav/geometry.hpp"
#include "objnav/planning.hpp"

namespace objnav {

/// Pose in the fixed world frame of a Scene (meters, radians).
struct WorldPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// World -> episodic: the frame anchored at the episode start pose.
EpisodicPose world_to_episodic(const WorldPose& p, const WorldPose& anchor);
WorldPose episodic_to_world(const EpisodicPose& p, const WorldPose& anchor);

struct SceneObject {
  int id = 0;
  int class_id = 0; // 1..21
  std::vector<CellIndex> cells;
};

/// Planar world: a solid-cell grid (walls + object footprints) with a
/// class label per object cell. Immutable after construction.
class Scene {
 public:
  Scene() = default;
  Scene(int rows, int cols, double resolution);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double resolution() const { return resolution_; }
  double width_m() const { return rows_ * resolution_; }
  double height_m() const { return cols_ * resolution_; }

  bool in_bounds(int i, int j) const {
    return i >= 0 && i < rows_ && j >= 0 && j < cols_;
  }
  bool in_bounds(double x, double y) const {
    return x >= 0.0 && x < width_m() && y >= 0.0 && y < height_m();
  }
  bool solid(int i, int j) const { return solid_[idx(i, j)] != 0; }
  int label(int i, int j) const { return label_[idx(i, j)]; }

  CellIndex cell_of(double x, double y) const {
    return {int(x / resolution_), int(y / resolution_)};
  }
  double cell_center_x(int i) const { return (i + 0.5) * resolution_; }
  double cell_center_y(int j) const { return (j + 0.5) * resolution_; }

  void set_wall(int i, int j);
  void add_object(SceneObject obj);
  const std::vector<SceneObject>& objects() const { return objects_; }

  /// Wall cells only (object footprints excluded), for serialization.
  bool wall(int i, int j) const { return wall_[idx(i, j)] != 0; }

  std::string to_json() const;
  static Scene from_json(const std::string& text);

 private:
  std::size_t idx(int i, int j) const { return std::size_t(i) * cols_ + j; }

  int rows_ = 0;
  int cols_ = 0;
  double resolution_ = 0.05;
  std::vector<std::uint8_t> wall_;
  std::vector<std::uint8_t> solid_;
  std::vector<std::int16_t> label_;
  std::vector<SceneObject> objects_;
};

struct Episode {
  WorldPose start;
  int target_class = 0;
  int max_steps = 500;
  double success_radius = 1.0; // meters

  std::string to_json() const;
  static Episode from_json(const std::string& text);
};

struct Kinematics {
  double forward_step = 0.25;              // meters
  double turn_step = 30.0 * kPi / 180.0;   // radians
};

struct AgentState {
  WorldPose world;
  WorldPose anchor;   // episode start pose, fixes the episodic frame
  bool collided = false;
  double block_distance = -1.0; // distance of the blocking sample, if collided
  int t = 0;

  EpisodicPose episodic() const { return world_to_episodic(world, anchor); }
};

AgentState make_agent(const Episode& episode);

/// Cast one ray per camera column; depth is the distance to the first
/// solid cell within [min_range, max_range], kInvalidDepth otherwise.
/// The label is the hit cell's object class, 0 for bare walls. Optional
/// label noise flips a column's class uniformly with the given
/// probability (0 disables it, the default).
Observation observe(const Scene& scene, const AgentState& agent,
                    const CameraModel& cam, double label_noise = 0.0,
                    std::uint64_t noise_seed = 0);

/// Discrete kinematics. MOVE_FORWARD is blocking: if the 0.25 m advance
/// would cross a solid cell or leave the scene, the pose is unchanged
/// and the collision flag set. Turns are exact +-30 degrees. STOP leaves
/// the pose untouched. The step counter always advances.
AgentState step(const Scene& scene, const AgentState& agent,
                DiscreteAction action, const Kinematics& kin = {});

struct UnreachableTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Geodesic distance to the nearest instance of one target class,
/// precomputed by multi-source Dijkstra from the free cells bordering
/// every instance footprint.
class DistanceField {
 public:
  DistanceField(const Scene& scene, int target_class);

  /// Distance in meters at a world position. Looks at the containing
  /// cell, falling back to the nearest finite neighbor within one cell.
  double meters_at(double x, double y) const;
  double meters_at(const WorldPose& p) const { return meters_at(p.x, p.y); }

  int target_class() const { return target_class_; }

 private:
  const Scene* scene_;
  int target_class_;
  std::vector<double> dist_; // meters per cell, +inf where unreachable
};

/// Convenience wrapper building a fresh field per call.
double geodesic_distance(const Scene& scene, const WorldPose& from,
                         int target_class);

/// Perfect-knowledge imitation target: STOP iff already within the
/// success radius, otherwise the action whose simulated outcome
/// minimizes geodesic distance (ties: MOVE_FORWARD, TURN_LEFT,
/// TURN_RIGHT, in that order).
DiscreteAction greedy_oracle_action(const Scene& scene,
                                    const DistanceField& field,
                                    const AgentState& agent,
                                    double success_radius,
                                    const Kinematics& kin = {});

bool check_success(const DistanceField& field, const AgentState& agent,
                   double success_radius);

struct GenParams {
  double world_size_m = 10.0;
  int min_wall_segments = 2;
  int max_wall_segments = 5;
  int objects = 8;
  int object_min_cells = 6;  // footprint side, 0.3 m at 0.05 m/cell
  int object_max_cells = 14;
  int retries = 100;
};

struct Scenario {
  Scene scene;
  Episode episode;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Seeded procedural rooms, corridors, and labeled objects. The episode
/// start and target are verified mutually reachable; identical seeds
/// yield identical scenarios.
Scenario generate_scene(std::uint64_t seed, const GenParams& params = {});

}  // namespace objnav

#endif  // OBJNAV_SIMULATOR_HPP_
