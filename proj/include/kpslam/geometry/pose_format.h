#pragma once

#include <iosfwd>
#include <string>

#include "kpslam/geometry/se3.h"

namespace kpslam::geometry {

/// Number with 9 significant digits, negative zero printed as 0.
std::string format_number(double v);

/// `timestamp tx ty tz qx qy qz qw` for a camera-to-world pose; the timestamp
/// has 9 decimals. The quaternion sign is fixed so that qw >= 0.
std::string format_tum_pose(double timestamp, const SE3Pose& camera_to_world);

/// 12 numbers of the 3x4 [R | t] matrix, row-major.
std::string format_kitti_pose(const SE3Pose& camera_to_world);

}  // namespace kpslam::geometry
