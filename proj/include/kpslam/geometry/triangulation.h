#pragma once

#include "kpslam/geometry/camera.h"

namespace kpslam::geometry {

struct TriangulationOptions {
  double min_parallax_deg = 0.5;
  int polish_iterations = 5;  // 0 disables the two-view Gauss-Newton polish
};

/// Two-view triangulation (linear DLT, then Gauss-Newton on reprojection error).
/// Poses are world-to-camera. Returns a world-frame landmark.
/// Throws kDegenerateBaseline when both camera centres coincide and
/// kIllConditioned when the ray parallax is below the threshold.
Landmark3D triangulate(const SE3Pose& pose_a, const SE3Pose& pose_b, const CameraIntrinsics& K,
                       const Vector2& px_a, const Vector2& px_b,
                       const TriangulationOptions& options = {});

/// Angle in degrees between the viewing rays of two observations.
double ray_parallax_deg(const SE3Pose& pose_a, const SE3Pose& pose_b, const CameraIntrinsics& K,
                        const Vector2& px_a, const Vector2& px_b);

}  // namespace kpslam::geometry
