#pragma once

#include <Eigen/Core>

#include "kpslam/geometry/se3.h"

namespace kpslam::geometry {

using Matrix23 = Eigen::Matrix<double, 2, 3>;
using Matrix26 = Eigen::Matrix<double, 2, 6>;

/// Coordinate frame a landmark position is expressed in.
enum class CoordinateFrame { kWorld, kCamera };

struct Landmark3D {
  Vector3 position = Vector3::Zero();
  CoordinateFrame frame = CoordinateFrame::kWorld;
};

/// Pinhole intrinsics, no distortion.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws kInvalidArgument when the invariants do not hold.
  void validate() const;

  bool in_image(const Vector2& px, double border = 0.0) const {
    return px.x() >= border && px.y() >= border && px.x() <= width - 1 - border &&
           px.y() <= height - 1 - border;
  }
};

/// u = fx x / z + cx, v = fy y / z + cy. Throws kBehindCamera for z <= 0.
Vector2 project(const CameraIntrinsics& K, const Vector3& p_cam);
Vector2 project(const CameraIntrinsics& K, const Landmark3D& p_cam);

/// Projection without the depth check, for callers that already tested z.
inline Vector2 project_unchecked(const CameraIntrinsics& K, const Vector3& p) {
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Vector3 unproject(const CameraIntrinsics& K, const Vector2& px, double depth);

/// Bearing (not normalized) through a pixel: K^-1 [u v 1].
inline Vector3 pixel_ray(const CameraIntrinsics& K, const Vector2& px) {
  return {(px.x() - K.cx) / K.fx, (px.y() - K.cy) / K.fy, 1.0};
}

/// d pi / d p_cam.
Matrix23 projection_jacobian(const CameraIntrinsics& K, const Vector3& p_cam);

/// d pi(exp(delta) * T * p_world) / d delta at delta = 0.
Matrix26 projection_pose_jacobian(const CameraIntrinsics& K, const Vector3& p_cam);

}  // namespace kpslam::geometry
