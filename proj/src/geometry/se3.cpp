#include "kpslam/geometry/se3.h"

#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::geometry {

namespace {

constexpr double kSmallAngle = 1e-10;

// V matrix of the SE(3) exponential and its inverse.
Matrix3 left_jacobian(const Vector3& phi) {
  const double theta = phi.norm();
  const Matrix3 K = skew(phi);
  if (theta < 1e-5) {
    return Matrix3::Identity() + 0.5 * K + K * K / 6.0;
  }
  const double t2 = theta * theta;
  return Matrix3::Identity() + (1.0 - std::cos(theta)) / t2 * K +
         (theta - std::sin(theta)) / (t2 * theta) * K * K;
}

Matrix3 left_jacobian_inverse(const Vector3& phi) {
  const double theta = phi.norm();
  const Matrix3 K = skew(phi);
  if (theta < 1e-5) {
    return Matrix3::Identity() - 0.5 * K + K * K / 12.0;
  }
  const double half = 0.5 * theta;
  const double cot_term = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  return Matrix3::Identity() - 0.5 * K + cot_term * K * K;
}

}  // namespace

Matrix3 skew(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Quaterniond so3_exp(const Vector3& omega) {
  const double theta = omega.norm();
  if (theta < kSmallAngle) {
    Eigen::Quaterniond q(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z());
    return q.normalized();
  }
  const Vector3 axis = omega / theta;
  return Eigen::Quaterniond(Eigen::AngleAxisd(theta, axis)).normalized();
}

Vector3 so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vector3 v = q.vec();
  const double sin_half = v.norm();
  if (sin_half < kSmallAngle) {
    return 2.0 * v;
  }
  const double theta = 2.0 * std::atan2(sin_half, q.w());
  return theta / sin_half * v;
}

SE3Pose::SE3Pose(const Eigen::Quaterniond& rotation, const Vector3& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

SE3Pose::SE3Pose(const Matrix3& rotation, const Vector3& translation)
    : rotation_(Eigen::Quaterniond(rotation).normalized()), translation_(translation) {}

SE3Pose SE3Pose::inverse() const {
  const Eigen::Quaterniond qi = rotation_.conjugate();
  return SE3Pose(qi, -(qi * translation_));
}

double SE3Pose::angle() const { return so3_log(rotation_).norm(); }

Eigen::Matrix4d SE3Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

SE3Pose compose(const SE3Pose& a, const SE3Pose& b) {
  return SE3Pose((a.rotation() * b.rotation()).normalized(),
                 a.rotation() * b.translation() + a.translation());
}

SE3Pose se3_exp(const Vector6& twist) {
  const Vector3 rho = twist.head<3>();
  const Vector3 phi = twist.tail<3>();
  return SE3Pose(so3_exp(phi), left_jacobian(phi) * rho);
}

Vector6 se3_log(const SE3Pose& pose) {
  const Vector3 phi = so3_log(pose.rotation());
  if (M_PI - phi.norm() < 1e-9) {
    throw Error(ErrorCode::kNonUniqueLogarithm, "se3_log: rotation angle is pi");
  }
  Vector6 out;
  out.head<3>() = left_jacobian_inverse(phi) * pose.translation();
  out.tail<3>() = phi;
  return out;
}

double rotation_distance_deg(const SE3Pose& a, const SE3Pose& b) {
  return so3_log(a.rotation().conjugate() * b.rotation()).norm() * 180.0 / M_PI;
}

double translation_distance(const SE3Pose& a, const SE3Pose& b) {
  return (a.translation() - b.translation()).norm();
}

}  // namespace kpslam::geometry
