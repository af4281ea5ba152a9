#ifndef OBJNAV_CAMERA_HPP_
#define OBJNAV_CAMERA_HPP_

#include <vector>

#include "objnav/geometry.hpp"

namespace objnav {

/// Planar range sensor: W columns spanning the horizontal field of view.
struct CameraModel {
  int columns = 256;
  double hfov = 79.0 * kPi / 180.0; // radians
  double min_range = 0.1;           // meters
  double max_range = 5.0;           // meters

  /// Ray angle of a column relative to the heading, CCW-positive.
  /// Column 0 is the leftmost ray (+hfov/2); angles are evenly spaced
  /// down to -hfov/2 at the last column.
  double column_angle(int col) const {
    if (columns == 1) return 0.0;
    return hfov / 2.0 - col * hfov / (columns - 1);
  }
};

/// Sentinel for columns with no return (out of range or off the scene).
inline constexpr double kInvalidDepth = -1.0;

inline bool depth_valid(double d) { return d >= 0.0; }

/// One step's sensor reading: a depth value and a class label per column,
/// plus the episodic pose the reading was taken from. Label 0 means an
/// obstacle without a semantic class.
struct Observation {
  int t = 0;
  std::vector<double> depth;
  std::vector<int> labels;
  EpisodicPose pose;
};

}  // namespace objnav

#endif  // OBJNAV_CAMERA_HPP_
