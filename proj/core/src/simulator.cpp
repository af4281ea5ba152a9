#include "objnav/simulator.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace objnav {

EpisodicPose world_to_episodic(const WorldPose& p, const WorldPose& anchor) {
  double dx = p.x - anchor.x;
  double dy = p.y - anchor.y;
  double c = std::cos(-anchor.yaw);
  double s = std::sin(-anchor.yaw);
  return {c * dx - s * dy, s * dx + c * dy, wrap_angle(p.yaw - anchor.yaw)};
}

WorldPose episodic_to_world(const EpisodicPose& p, const WorldPose& anchor) {
  double c = std::cos(anchor.yaw);
  double s = std::sin(anchor.yaw);
  return {anchor.x + c * p.x - s * p.y, anchor.y + s * p.x + c * p.y,
          wrap_angle(p.yaw + anchor.yaw)};
}

Scene::Scene(int rows, int cols, double resolution)
    : rows_(rows),
      cols_(cols),
      resolution_(resolution),
      wall_(std::size_t(rows) * cols, 0),
      solid_(std::size_t(rows) * cols, 0),
      label_(std::size_t(rows) * cols, 0) {}

void Scene::set_wall(int i, int j) {
  wall_[idx(i, j)] = 1;
  solid_[idx(i, j)] = 1;
}

void Scene::add_object(SceneObject obj) {
  if (obj.cells.empty()) {
    throw std::invalid_argument("scene object with empty footprint");
  }
  if (obj.class_id < 1 || obj.class_id > SemanticGrid::kNumClasses) {
    throw std::invalid_argument("scene object class outside 1..21");
  }
  for (const auto& c : obj.cells) {
    if (!in_bounds(c.i, c.j)) {
      throw std::invalid_argument("scene object footprint out of bounds");
    }
    solid_[idx(c.i, c.j)] = 1;
    label_[idx(c.i, c.j)] = static_cast<std::int16_t>(obj.class_id);
  }
  objects_.push_back(std::move(obj));
}

std::string Scene::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["resolution"] = resolution_;
  j["rows"] = rows_;
  j["cols"] = cols_;
  // Run-length encoding of the wall grid, row-major, runs alternating
  // free/solid starting with free.
  std::vector<std::int64_t> runs;
  std::uint8_t cur = 0;
  std::int64_t count = 0;
  for (std::uint8_t v : wall_) {
    if (v == cur) {
      ++count;
    } else {
      runs.push_back(count);
      cur = v;
      count = 1;
    }
  }
  runs.push_back(count);
  j["walls_rle"] = runs;
  j["objects"] = nlohmann::json::array();
  for (const auto& o : objects_) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : o.cells) cells.push_back({c.i, c.j});
    j["objects"].push_back(
        {{"id", o.id}, {"class", o.class_id}, {"cells", cells}});
  }
  return j.dump();
}

Scene Scene::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("version").get<int>() != 1) {
    throw std::invalid_argument("unsupported scene format version");
  }
  Scene scene(j.at("rows").get<int>(), j.at("cols").get<int>(),
              j.at("resolution").get<double>());
  std::size_t pos = 0;
  std::uint8_t cur = 0;
  for (std::int64_t run : j.at("walls_rle")) {
    for (std::int64_t k = 0; k < run; ++k, ++pos) {
      if (cur) {
        scene.set_wall(int(pos) / scene.cols_, int(pos) % scene.cols_);
      }
    }
    cur = !cur;
  }
  if (pos != scene.wall_.size()) {
    throw std::invalid_argument("scene RLE length mismatch");
  }
  for (const auto& jo : j.at("objects")) {
    SceneObject o;
    o.id = jo.at("id").get<int>();
    o.class_id = jo.at("class").get<int>();
    for (const auto& jc : jo.at("cells")) {
      o.cells.push_back({jc.at(0).get<int>(), jc.at(1).get<int>()});
    }
    scene.add_object(std::move(o));
  }
  return scene;
}

std::string Episode::to_json() const {
  nlohmann::json j;
  j["start"] = {{"x", start.x}, {"y", start.y}, {"yaw", start.yaw}};
  j["target_class"] = target_class;
  j["max_steps"] = max_steps;
  j["success_radius"] = success_radius;
  return j.dump();
}

Episode Episode::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Episode e;
  e.start = {j.at("start").at("x").get<double>(),
             j.at("start").at("y").get<double>(),
             j.at("start").at("yaw").get<double>()};
  e.target_class = j.at("target_class").get<int>();
  e.max_steps = j.at("max_steps").get<int>();
  e.success_radius = j.at("success_radius").get<double>();
  return e;
}

AgentState make_agent(const Episode& episode) {
  AgentState a;
  a.world = episode.start;
  a.anchor = episode.start;
  return a;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Amanatides-Woo grid traversal. Returns the distance to the entry face
// of the first solid cell, or +inf if the ray leaves the scene first.
struct RayHit {
  double range = kInf;
  int i = -1;
  int j = -1;
};

RayHit raycast(const Scene& scene, double x, double y, double heading,
               double max_range) {
  const double res = scene.resolution();
  double dx = std::cos(heading);
  double dy = std::sin(heading);
  int i = int(std::floor(x / res));
  int j = int(std::floor(y / res));
  int si = dx > 0 ? 1 : -1;
  int sj = dy > 0 ? 1 : -1;
  double t_max_x = dx != 0.0
                       ? ((dx > 0 ? (i + 1) * res - x : x - i * res) /
                          std::abs(dx))
                       : kInf;
  double t_max_y = dy != 0.0
                       ? ((dy > 0 ? (j + 1) * res - y : y - j * res) /
                          std::abs(dy))
                       : kInf;
  double t_delta_x = dx != 0.0 ? res / std::abs(dx) : kInf;
  double t_delta_y = dy != 0.0 ? res / std::abs(dy) : kInf;

  if (scene.in_bounds(i, j) && scene.solid(i, j)) return {0.0, i, j};
  double t = 0.0;
  while (t <= max_range) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      i += si;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      j += sj;
    }
    if (!scene.in_bounds(i, j)) return {};
    if (t > max_range) return {};
    if (scene.solid(i, j)) return {t, i, j};
  }
  return {};
}

}  // namespace

Observation observe(const Scene& scene, const AgentState& agent,
                    const CameraModel& cam, double label_noise,
                    std::uint64_t noise_seed) {
  Observation obs;
  obs.t = agent.t;
  obs.pose = agent.episodic();
  obs.depth.assign(cam.columns, kInvalidDepth);
  obs.labels.assign(cam.columns, 0);
  std::mt19937_64 noise_rng(noise_seed);
  for (int col = 0; col < cam.columns; ++col) {
    double heading = agent.world.yaw + cam.column_angle(col);
    RayHit hit =
        raycast(scene, agent.world.x, agent.world.y, heading, cam.max_range);
    if (!std::isfinite(hit.range) || hit.range < cam.min_range) continue;
    obs.depth[col] = hit.range;
    int label = scene.label(hit.i, hit.j);
    if (label_noise > 0.0) {
      double u = (noise_rng() >> 11) * 0x1.0p-53;
      if (u < label_noise) {
        label = int(noise_rng() % (SemanticGrid::kNumClasses + 1));
      }
    }
    obs.labels[col] = label;
  }
  return obs;
}

AgentState step(const Scene& scene, const AgentState& agent,
                DiscreteAction action, const Kinematics& kin) {
  AgentState next = agent;
  next.collided = false;
  next.block_distance = -1.0;
  next.t = agent.t + 1;
  switch (action) {
    case DiscreteAction::Stop:
      break;
    case DiscreteAction::TurnLeft:
      next.world.yaw = wrap_angle(agent.world.yaw + kin.turn_step);
      break;
    case DiscreteAction::TurnRight:
      next.world.yaw = wrap_angle(agent.world.yaw - kin.turn_step);
      break;
    case DiscreteAction::MoveForward: {
      double dx = std::cos(agent.world.yaw);
      double dy = std::sin(agent.world.yaw);
      bool blocked = false;
      double block_at = -1.0;
      const int samples =
          std::max(1, int(std::ceil(kin.forward_step /
                                    (0.5 * scene.resolution()))));
      for (int s = 1; s <= samples; ++s) {
        double d = kin.forward_step * s / samples;
        double x = agent.world.x + d * dx;
        double y = agent.world.y + d * dy;
        if (!scene.in_bounds(x, y)) {
          blocked = true;
          block_at = d;
          break;
        }
        CellIndex c = scene.cell_of(x, y);
        if (scene.solid(c.i, c.j)) {
          blocked = true;
          block_at = d;
          break;
        }
      }
      if (blocked) {
        next.collided = true;
        next.block_distance = block_at;
      } else {
        next.world.x = agent.world.x + kin.forward_step * dx;
        next.world.y = agent.world.y + kin.forward_step * dy;
      }
      break;
    }
  }
  return next;
}

DistanceField::DistanceField(const Scene& scene, int target_class)
    : scene_(&scene),
      target_class_(target_class),
      dist_(std::size_t(scene.rows()) * scene.cols(), kInf) {
  const int cols = scene.cols();
  const double res = scene.resolution();
  const double diag = res * std::sqrt(2.0);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  bool have_instance = false;
  for (const auto& obj : scene.objects()) {
    if (obj.class_id != target_class) continue;
    have_instance = true;
    for (const auto& c : obj.cells) {
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          int ni = c.i + di, nj = c.j + dj;
          if (!scene.in_bounds(ni, nj) || scene.solid(ni, nj)) continue;
          std::size_t id = std::size_t(ni) * cols + nj;
          if (dist_[id] > 0.0) {
            dist_[id] = 0.0;
            open.push({0.0, int(id)});
          }
        }
      }
    }
  }
  if (!have_instance) {
    throw UnreachableTargetError("no instance of target class in scene");
  }

  constexpr int kDi[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  constexpr int kDj[8] = {0, 0, -1, 1, -1, 1, -1, 1};
  while (!open.empty()) {
    auto [d, id] = open.top();
    open.pop();
    if (d > dist_[id]) continue;
    int ci = id / cols, cj = id % cols;
    for (int k = 0; k < 8; ++k) {
      int ni = ci + kDi[k], nj = cj + kDj[k];
      if (!scene.in_bounds(ni, nj) || scene.solid(ni, nj)) continue;
      std::size_t nid = std::size_t(ni) * cols + nj;
      double nd = d + (k < 4 ? res : diag);
      if (nd < dist_[nid]) {
        dist_[nid] = nd;
        open.push({nd, int(nid)});
      }
    }
  }
}

double DistanceField::meters_at(double x, double y) const {
  CellIndex c = scene_->cell_of(x, y);
  double best = kInf;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      int ni = c.i + di, nj = c.j + dj;
      if (!scene_->in_bounds(ni, nj)) continue;
      std::size_t id = std::size_t(ni) * scene_->cols() + nj;
      // The containing cell wins when finite; neighbors only break ties
      // for positions inside or flush against solid cells.
      if (di == 0 && dj == 0 && std::isfinite(dist_[id])) return dist_[id];
      best = std::min(best, dist_[id]);
    }
  }
  if (!std::isfinite(best)) {
    throw UnreachableTargetError("position disconnected from target");
  }
  return best;
}

double geodesic_distance(const Scene& scene, const WorldPose& from,
                         int target_class) {
  return DistanceField(scene, target_class).meters_at(from);
}

DiscreteAction greedy_oracle_action(const Scene& scene,
                                    const DistanceField& field,
                                    const AgentState& agent,
                                    double success_radius,
                                    const Kinematics& kin) {
  if (field.meters_at(agent.world) <= success_radius) {
    return DiscreteAction::Stop;
  }
  const double here = field.meters_at(agent.world);
  AgentState fwd = step(scene, agent, DiscreteAction::MoveForward, kin);
  if (!fwd.collided && field.meters_at(fwd.world) < here) {
    return DiscreteAction::MoveForward;
  }
  // Turning alone never changes the distance, so score each turn by the
  // forward step it enables; otherwise a blocked heading ties with the
  // turns and the agent wedges against the wall.
  DiscreteAction best = DiscreteAction::TurnLeft;
  double best_d = kInf;
  for (DiscreteAction a : {DiscreteAction::TurnLeft,
                           DiscreteAction::TurnRight}) {
    AgentState turned = step(scene, agent, a, kin);
    AgentState then = step(scene, turned, DiscreteAction::MoveForward, kin);
    double d = then.collided ? here : field.meters_at(then.world);
    if (d < best_d) {
      best_d = d;
      best = a;
    }
  }
  return best;
}

bool check_success(const DistanceField& field, const AgentState& agent,
                   double success_radius) {
  return field.meters_at(agent.world) <= success_radius;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct GenRng {
  std::mt19937_64 eng;
  explicit GenRng(std::uint64_t seed) : eng(seed) {}
  int uniform_int(int lo, int hi) { // inclusive
    return lo + int(eng() % std::uint64_t(hi - lo + 1));
  }
  double uniform(double lo, double hi) {
    return lo + ((eng() >> 11) * 0x1.0p-53) * (hi - lo);
  }
};

bool region_free(const Scene& scene, int i0, int j0, int i1, int j1) {
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      if (!scene.in_bounds(i, j) || scene.solid(i, j)) return false;
    }
  }
  return true;
}

bool try_generate(GenRng& rng, const GenParams& params, Scenario& out) {
  const double res = 0.05;
  const int n = int(std::lround(params.world_size_m / res));
  Scene scene(n, n, res);

  // Boundary walls, two cells thick.
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < 2; ++b) {
      scene.set_wall(i, b);
      scene.set_wall(i, n - 1 - b);
      scene.set_wall(b, i);
      scene.set_wall(n - 1 - b, i);
    }
  }

  // Internal walls spanning the world, each with one door gap.
  int segments =
      rng.uniform_int(params.min_wall_segments, params.max_wall_segments);
  for (int s = 0; s < segments; ++s) {
    bool horizontal = rng.uniform_int(0, 1) == 1;
    int c = rng.uniform_int(n / 8, n - n / 8 - 2);
    int gap = rng.uniform_int(24, 40); // 1.2 to 2.0 m doorway
    int gap_at = rng.uniform_int(2, n - 2 - gap);
    for (int k = 2; k < n - 2; ++k) {
      if (k >= gap_at && k < gap_at + gap) continue;
      if (horizontal) {
        scene.set_wall(c, k);
        scene.set_wall(c + 1, k);
      } else {
        scene.set_wall(k, c);
        scene.set_wall(k, c + 1);
      }
    }
  }

  // Labeled rectangular objects with a free two-cell ring so every
  // instance stays approachable.
  for (int o = 0; o < params.objects; ++o) {
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      int w = rng.uniform_int(params.object_min_cells, params.object_max_cells);
      int h = rng.uniform_int(params.object_min_cells, params.object_max_cells);
      int i0 = rng.uniform_int(3, n - 4 - w);
      int j0 = rng.uniform_int(3, n - 4 - h);
      if (!region_free(scene, i0 - 2, j0 - 2, i0 + w + 1, j0 + h + 1)) {
        continue;
      }
      SceneObject obj;
      obj.id = o;
      obj.class_id = rng.uniform_int(1, SemanticGrid::kNumClasses);
      for (int i = i0; i < i0 + w; ++i) {
        for (int j = j0; j < j0 + h; ++j) obj.cells.push_back({i, j});
      }
      scene.add_object(std::move(obj));
      placed = true;
    }
    if (!placed) return false;
  }

  // Start pose with clearance.
  int start_i = -1, start_j = -1;
  for (int attempt = 0; attempt < 200; ++attempt) {
    int i = rng.uniform_int(5, n - 6);
    int j = rng.uniform_int(5, n - 6);
    if (region_free(scene, i - 3, j - 3, i + 3, j + 3)) {
      start_i = i;
      start_j = j;
      break;
    }
  }
  if (start_i < 0) return false;

  int target_idx = rng.uniform_int(0, params.objects - 1);
  int target_class = scene.objects()[target_idx].class_id;
  double yaw0 = rng.uniform(-kPi, kPi);

  Episode episode;
  episode.start = {scene.cell_center_x(start_i), scene.cell_center_y(start_j),
                   yaw0};
  episode.target_class = target_class;

  DistanceField field(scene, target_class);
  double d0;
  try {
    d0 = field.meters_at(episode.start.x, episode.start.y);
  } catch (const UnreachableTargetError&) {
    return false;
  }
  if (!(d0 > episode.success_radius)) return false;

  // Keep the nearest instance inside the episodic map extent so a
  // border-clamped global goal can never strand the agent.
  double nearest = kInf;
  for (const auto& obj : scene.objects()) {
    if (obj.class_id != target_class) continue;
    for (const auto& c : obj.cells) {
      nearest = std::min(nearest,
                         std::hypot(scene.cell_center_x(c.i) - episode.start.x,
                                    scene.cell_center_y(c.j) - episode.start.y));
    }
  }
  if (nearest > 12.0) return false;

  out.scene = std::move(scene);
  out.episode = episode;
  return true;
}

}  // namespace

Scenario generate_scene(std::uint64_t seed, const GenParams& params) {
  if (params.objects < 1) {
    throw std::invalid_argument("generate_scene: at least one object required");
  }
  for (int attempt = 0; attempt < params.retries; ++attempt) {
    GenRng rng(splitmix64(seed + std::uint64_t(attempt) * 0x100000001B3ull));
    Scenario scenario;
    if (try_generate(rng, params, scenario)) return scenario;
  }
  throw GenerationError("generate_scene: retry budget exhausted");
}

}  // namespace objnav
