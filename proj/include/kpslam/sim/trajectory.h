#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpslam/geometry/se3.h"

namespace kpslam::sim {

enum class TrajectoryKind { kCircle, kSquareLoop, kStraight, kFastRotation };

TrajectoryKind trajectory_kind_from_string(const std::string& name);
std::string to_string(TrajectoryKind kind);

/// World frame: y points down, camera paths lie in the y = 0 plane.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kCircle;
  int n_frames = 100;
  double radius = 3.0;         // circle radius, square-loop half-size
  double laps = 1.0;           // circle and square-loop revolutions
  double squareness = 4.0;     // superellipse exponent of the square loop
  double speed = 0.05;         // straight / fast-rotation translation per frame
  double yaw_amplitude_deg = 30.0;  // fast-rotation
  double yaw_period = 24.0;         // fast-rotation, frames
};

/// Ground-truth world-to-camera poses.
///  circle: on a circle of `radius` around the origin, looking at the centre.
///  square-loop: on a superellipse |x|^p + |z|^p = r^p, looking outward; one
///    lap ends exactly at the start pose.
///  straight: translating along +x at `speed`, looking along +z.
///  fast-rotation: straight motion with a sinusoidal yaw oscillation.
std::vector<geometry::SE3Pose> gen_trajectory(const TrajectorySpec& spec);

/// World-to-camera pose of a camera at `center` whose optical axis points
/// along `forward`, with image "down" along world +y as far as possible.
geometry::SE3Pose look_along(const geometry::Vector3& center, const geometry::Vector3& forward);

/// Compounds multiplicative noise on every relative motion. For each edge the
/// translation is perturbed with sigma drift_rate * |t| and the rotation with
/// sigma drift_rate * |t| radians. drift_rate 0 returns the input unchanged;
/// negative rates throw kInvalidArgument.
std::vector<geometry::SE3Pose> perturb_odometry(const std::vector<geometry::SE3Pose>& poses,
                                                double drift_rate, std::uint64_t seed = 1);

}  // namespace kpslam::sim
