#ifndef OBJNAV_SEMANTIC_MAP_HPP_
#define OBJNAV_SEMANTIC_MAP_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "objnav/camera.hpp"
#include "objnav/geometry.hpp"

namespace objnav {

/// Egocentric window of the semantic grid, always 25x256x256 with zero
/// padding where the window leaves the map.
struct MapCrop {
  static constexpr int kSize = 256;
  static constexpr int kHalf = kSize / 2;
  std::vector<std::uint8_t> cells; // channel-major, kSize*kSize per channel

  bool at(int ch, int u, int v) const {
    return cells[(ch * kSize + u) * kSize + v] != 0;
  }
};

/// 25-channel top-down semantic grid.
///
/// Channel 0 holds obstacles without a semantic class, channels 1..21 the
/// target classes, channel 22 the per-cell max over 0..21 (occupation),
/// channel 23 the agent's trail since step 0, channel 24 exactly the
/// agent's current cell. All channels are binary and sticky except 24.
class SemanticGrid {
 public:
  static constexpr int kChannels = 25;
  static constexpr int kNumClasses = 21;
  static constexpr int kObstacleChannel = 0;
  static constexpr int kOccupationChannel = 22;
  static constexpr int kTrailChannel = 23;
  static constexpr int kLocationChannel = 24;

  explicit SemanticGrid(MapSpec spec = {});

  /// Clear every channel, then stamp the trail and location channels at
  /// the episodic origin cell.
  void reset();

  /// Project one observation into the grid: each valid depth reading
  /// marks the cell of its world point in the channel of its label
  /// (channel 0 when unlabeled) and in the occupation channel; the trail
  /// and location channels follow the observation's pose.
  void project_observation(const Observation& obs, const CameraModel& cam);

  /// 25x256x256 window centered on the agent's current cell.
  MapCrop crop_egocentric() const;
  /// Same, reusing the caller's buffer to skip the per-step allocation.
  void crop_egocentric(MapCrop& crop) const;

  /// Retract the obstacle and class marks of one cell (channels 0..22).
  /// Negative evidence: the agent physically passed through the cell, so
  /// earlier marks there were projection artifacts.
  void clear_obstacle(const CellIndex& c);

  bool at(int ch, int i, int j) const { return cells_[index(ch, i, j)] != 0; }
  CellIndex agent_cell() const { return agent_; }
  const MapSpec& spec() const { return spec_; }

  std::span<const std::uint8_t> channel(int ch) const;
  std::size_t channel_popcount(int ch) const;

  /// Write one channel as a binary PGM (255 = set) or a 0/1 CSV matrix.
  void dump_channel_pgm(int ch, const std::string& path) const;
  void dump_channel_csv(int ch, const std::string& path) const;

 private:
  std::size_t index(int ch, int i, int j) const {
    return (static_cast<std::size_t>(ch) * spec_.size_cells + i) *
               spec_.size_cells + j;
  }
  void set(int ch, const CellIndex& c) { cells_[index(ch, c.i, c.j)] = 1; }
  void move_agent(const CellIndex& c);

  MapSpec spec_;
  CellIndex agent_;
  std::vector<std::uint8_t> cells_;
};

}  // namespace objnav

#endif  // OBJNAV_SEMANTIC_MAP_HPP_
