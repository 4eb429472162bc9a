#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace kpslam::geometry {

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Vector7 = Eigen::Matrix<double, 7, 1>;

Matrix3 skew(const Vector3& v);

// SO(3) exponential / logarithm through quaternions.
Eigen::Quaterniond so3_exp(const Vector3& omega);
Vector3 so3_log(const Eigen::Quaterniond& q);

/// Rigid transform. Used with the world-to-camera convention throughout:
/// a frame pose T_cw maps world coordinates into camera coordinates.
class SE3Pose {
 public:
  SE3Pose() : rotation_(Eigen::Quaterniond::Identity()), translation_(Vector3::Zero()) {}
  SE3Pose(const Eigen::Quaterniond& rotation, const Vector3& translation);
  SE3Pose(const Matrix3& rotation, const Vector3& translation);

  static SE3Pose identity() { return SE3Pose(); }

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }
  Matrix3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  SE3Pose inverse() const;
  Vector3 apply(const Vector3& x) const { return rotation_ * x + translation_; }
  Vector3 operator*(const Vector3& x) const { return apply(x); }

  /// Camera centre in world coordinates when this is a world-to-camera pose.
  Vector3 center() const { return -(rotation_.conjugate() * translation_); }

  /// Rotation angle in radians, in [0, pi].
  double angle() const;

  Eigen::Matrix4d matrix() const;

 private:
  Eigen::Quaterniond rotation_;
  Vector3 translation_;
};

/// a * b applies b first, then a. The result quaternion is renormalized.
SE3Pose compose(const SE3Pose& a, const SE3Pose& b);
inline SE3Pose operator*(const SE3Pose& a, const SE3Pose& b) { return compose(a, b); }

/// Twist layout is [rho (translation part), phi (rotation part)].
SE3Pose se3_exp(const Vector6& twist);
/// Throws kNonUniqueLogarithm when the rotation angle is pi.
Vector6 se3_log(const SE3Pose& pose);

/// Relative rotation angle in degrees and translation distance between poses.
double rotation_distance_deg(const SE3Pose& a, const SE3Pose& b);
double translation_distance(const SE3Pose& a, const SE3Pose& b);

}  // namespace kpslam::geometry
