#include "kpslam/geometry/triangulation.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::geometry {

namespace {

Eigen::Matrix<double, 3, 4> projection_matrix(const SE3Pose& pose) {
  Eigen::Matrix<double, 3, 4> P;
  P.leftCols<3>() = pose.rotation_matrix();
  P.col(3) = pose.translation();
  return P;
}

}  // namespace

double ray_parallax_deg(const SE3Pose& pose_a, const SE3Pose& pose_b, const CameraIntrinsics& K,
                        const Vector2& px_a, const Vector2& px_b) {
  const Vector3 ray_a = (pose_a.rotation().conjugate() * pixel_ray(K, px_a)).normalized();
  const Vector3 ray_b = (pose_b.rotation().conjugate() * pixel_ray(K, px_b)).normalized();
  const double c = std::clamp(ray_a.dot(ray_b), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

Landmark3D triangulate(const SE3Pose& pose_a, const SE3Pose& pose_b, const CameraIntrinsics& K,
                       const Vector2& px_a, const Vector2& px_b,
                       const TriangulationOptions& options) {
  if ((pose_a.center() - pose_b.center()).norm() < 1e-9) {
    throw Error(ErrorCode::kDegenerateBaseline, "triangulate: camera centres coincide");
  }
  if (ray_parallax_deg(pose_a, pose_b, K, px_a, px_b) < options.min_parallax_deg) {
    throw Error(ErrorCode::kIllConditioned, "triangulate: ray parallax below threshold");
  }

  // DLT in normalized image coordinates.
  const Vector3 xa = pixel_ray(K, px_a);
  const Vector3 xb = pixel_ray(K, px_b);
  const auto Pa = projection_matrix(pose_a);
  const auto Pb = projection_matrix(pose_b);
  Eigen::Matrix4d A;
  A.row(0) = xa.x() * Pa.row(2) - Pa.row(0);
  A.row(1) = xa.y() * Pa.row(2) - Pa.row(1);
  A.row(2) = xb.x() * Pb.row(2) - Pb.row(0);
  A.row(3) = xb.y() * Pb.row(2) - Pb.row(1);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (std::abs(h(3)) < 1e-12) {
    throw Error(ErrorCode::kIllConditioned, "triangulate: point at infinity");
  }
  Vector3 X = h.head<3>() / h(3);

  for (int it = 0; it < options.polish_iterations; ++it) {
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    Vector3 g = Vector3::Zero();
    bool valid = true;
    for (int view = 0; view < 2; ++view) {
      const SE3Pose& pose = view == 0 ? pose_a : pose_b;
      const Vector2& px = view == 0 ? px_a : px_b;
      const Vector3 pc = pose.apply(X);
      if (pc.z() <= 1e-12) {
        valid = false;
        break;
      }
      const Vector2 r = project_unchecked(K, pc) - px;
      const Matrix23 J = projection_jacobian(K, pc) * pose.rotation_matrix();
      H += J.transpose() * J;
      g += J.transpose() * r;
    }
    if (!valid) break;
    const Vector3 dx = H.ldlt().solve(-g);
    if (!dx.allFinite()) break;
    X += dx;
    if (dx.norm() < 1e-14 * (1.0 + X.norm())) break;
  }
  return Landmark3D{X, CoordinateFrame::kWorld};
}

}  // namespace kpslam::geometry
