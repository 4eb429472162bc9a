#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpslam/geometry/se3.h"

namespace kpslam::pipeline {

struct StampedPose {
  double timestamp = 0.0;
  geometry::SE3Pose camera_to_world;
};

using Trajectory = std::vector<StampedPose>;

enum class TrajectoryFormat { kTum, kKitti };

TrajectoryFormat trajectory_format_from_string(const std::string& name);

/// TUM: `timestamp tx ty tz qx qy qz qw` per line. KITTI: 12 numbers of the
/// 3x4 camera-to-world matrix per line, no timestamps. 9 significant digits.
void write_trajectory(std::ostream& out, const Trajectory& traj, TrajectoryFormat format);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, TrajectoryFormat format);

/// Format inferred per file from the column count (8 TUM, 12 KITTI). KITTI
/// rows get timestamps from `kitti_times` when given, else their row index
/// times `kitti_interval`. Throws kMalformedFile naming the line.
Trajectory read_trajectory(std::istream& in, const std::string& origin = "trajectory",
                           const std::vector<double>& kitti_times = {}, double kitti_interval = 1.0);
Trajectory read_trajectory(const std::filesystem::path& path, const std::vector<double>& kitti_times = {},
                           double kitti_interval = 1.0);

}  // namespace kpslam::pipeline
