#include "objnav/semantic_map.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace objnav {

SemanticGrid::SemanticGrid(MapSpec spec)
    : spec_(spec),
      cells_(static_cast<std::size_t>(kChannels) * spec.size_cells *
             spec.size_cells) {
  reset();
}

void SemanticGrid::reset() {
  std::fill(cells_.begin(), cells_.end(), std::uint8_t{0});
  agent_ = {spec_.origin_i, spec_.origin_j};
  set(kTrailChannel, agent_);
  set(kLocationChannel, agent_);
}

void SemanticGrid::move_agent(const CellIndex& c) {
  cells_[index(kLocationChannel, agent_.i, agent_.j)] = 0;
  agent_ = c;
  set(kLocationChannel, agent_);
  set(kTrailChannel, agent_);
}

void SemanticGrid::project_observation(const Observation& obs,
                                       const CameraModel& cam) {
  if (obs.depth.size() != obs.labels.size()) {
    throw std::invalid_argument(
        "project_observation: depth/label length mismatch");
  }
  for (std::size_t col = 0; col < obs.depth.size(); ++col) {
    double r = obs.depth[col];
    if (!depth_valid(r)) continue;
    double heading = obs.pose.yaw + cam.column_angle(static_cast<int>(col));
    EpisodicPose hit{obs.pose.x + r * std::cos(heading),
                     obs.pose.y + r * std::sin(heading), 0.0};
    CellIndex c = pose_to_cell(hit, spec_);
    int label = obs.labels[col];
    if (label < 0 || label > kNumClasses) {
      throw std::invalid_argument("project_observation: label out of range");
    }
    set(label == 0 ? kObstacleChannel : label, c);
    set(kOccupationChannel, c);
  }
  move_agent(pose_to_cell(obs.pose, spec_));
}

void SemanticGrid::clear_obstacle(const CellIndex& c) {
  if (c.i < 0 || c.i >= spec_.size_cells || c.j < 0 ||
      c.j >= spec_.size_cells) {
    return;
  }
  for (int ch = 0; ch <= kOccupationChannel; ++ch) {
    cells_[index(ch, c.i, c.j)] = 0;
  }
}

MapCrop SemanticGrid::crop_egocentric() const {
  MapCrop crop;
  crop_egocentric(crop);
  return crop;
}

void SemanticGrid::crop_egocentric(MapCrop& crop) const {
  crop.cells.assign(
      static_cast<std::size_t>(kChannels) * MapCrop::kSize * MapCrop::kSize,
      0);
  const int i0 = agent_.i - MapCrop::kHalf;
  const int j0 = agent_.j - MapCrop::kHalf;
  const int lo_u = std::max(0, -i0);
  const int hi_u = std::min(MapCrop::kSize, spec_.size_cells - i0);
  const int lo_v = std::max(0, -j0);
  const int hi_v = std::min(MapCrop::kSize, spec_.size_cells - j0);
  for (int ch = 0; ch < kChannels; ++ch) {
    for (int u = lo_u; u < hi_u; ++u) {
      if (lo_v >= hi_v) break;
      const std::uint8_t* src = &cells_[index(ch, i0 + u, j0 + lo_v)];
      std::uint8_t* dst =
          &crop.cells[(static_cast<std::size_t>(ch) * MapCrop::kSize + u) *
                          MapCrop::kSize + lo_v];
      std::memcpy(dst, src, hi_v - lo_v);
    }
  }
}

std::span<const std::uint8_t> SemanticGrid::channel(int ch) const {
  const std::size_t n =
      static_cast<std::size_t>(spec_.size_cells) * spec_.size_cells;
  return {cells_.data() + static_cast<std::size_t>(ch) * n, n};
}

std::size_t SemanticGrid::channel_popcount(int ch) const {
  std::size_t n = 0;
  for (std::uint8_t v : channel(ch)) n += v;
  return n;
}

void SemanticGrid::dump_channel_pgm(int ch, const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "P5\n" << spec_.size_cells << " " << spec_.size_cells << "\n255\n";
  for (std::uint8_t v : channel(ch)) out.put(v ? '\xff' : '\0');
}

void SemanticGrid::dump_channel_csv(int ch, const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  auto data = channel(ch);
  for (int i = 0; i < spec_.size_cells; ++i) {
    for (int j = 0; j < spec_.size_cells; ++j) {
      out << int(data[static_cast<std::size_t>(i) * spec_.size_cells + j]);
      out << (j + 1 == spec_.size_cells ? '\n' : ',');
    }
  }
}

}  // namespace objnav
