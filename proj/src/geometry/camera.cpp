#include "kpslam/geometry/camera.h"

#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::geometry {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "camera: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0 || cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw Error(ErrorCode::kInvalidArgument, "camera: principal point outside the image");
  }
}

Vector2 project(const CameraIntrinsics& K, const Vector3& p_cam) {
  if (!(p_cam.z() > 0.0)) {
    throw Error(ErrorCode::kBehindCamera, "project: point has non-positive depth");
  }
  return project_unchecked(K, p_cam);
}

Vector2 project(const CameraIntrinsics& K, const Landmark3D& p_cam) {
  if (p_cam.frame != CoordinateFrame::kCamera) {
    throw Error(ErrorCode::kInvalidArgument, "project: landmark is not in camera coordinates");
  }
  return project(K, p_cam.position);
}

Vector3 unproject(const CameraIntrinsics& K, const Vector2& px, double depth) {
  return depth * pixel_ray(K, px);
}

Matrix23 projection_jacobian(const CameraIntrinsics& K, const Vector3& p) {
  const double iz = 1.0 / p.z();
  const double iz2 = iz * iz;
  Matrix23 J;
  J << K.fx * iz, 0.0, -K.fx * p.x() * iz2,
       0.0, K.fy * iz, -K.fy * p.y() * iz2;
  return J;
}

Matrix26 projection_pose_jacobian(const CameraIntrinsics& K, const Vector3& p_cam) {
  Eigen::Matrix<double, 3, 6> dp;
  dp.leftCols<3>().setIdentity();
  dp.rightCols<3>() = -skew(p_cam);
  return projection_jacobian(K, p_cam) * dp;
}

}  // namespace kpslam::geometry
