#pragma once

#include "kpslam/geometry/se3.h"

namespace kpslam::geometry {

/// Similarity transform x -> s * R * x + t.
class Sim3Transform {
 public:
  Sim3Transform()
      : scale_(1.0), rotation_(Eigen::Quaterniond::Identity()), translation_(Vector3::Zero()) {}
  /// Throws kInvalidArgument unless scale > 0.
  Sim3Transform(double scale, const Eigen::Quaterniond& rotation, const Vector3& translation);
  explicit Sim3Transform(const SE3Pose& pose)
      : scale_(1.0), rotation_(pose.rotation()), translation_(pose.translation()) {}

  static Sim3Transform identity() { return Sim3Transform(); }

  double scale() const { return scale_; }
  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Vector3& translation() const { return translation_; }
  Matrix3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Vector3 apply(const Vector3& x) const { return scale_ * (rotation_ * x) + translation_; }
  Vector3 operator*(const Vector3& x) const { return apply(x); }
  Sim3Transform inverse() const;

  /// Drops the scale: (R, t / s). Maps a corrected similarity pose back to SE3.
  SE3Pose to_se3() const { return SE3Pose(rotation_, translation_ / scale_); }

 private:
  double scale_;
  Eigen::Quaterniond rotation_;
  Vector3 translation_;
};

Sim3Transform compose(const Sim3Transform& a, const Sim3Transform& b);
inline Sim3Transform operator*(const Sim3Transform& a, const Sim3Transform& b) {
  return compose(a, b);
}

/// Twist layout is [rho (3), omega (3), sigma = log(scale)].
Sim3Transform sim3_exp(const Vector7& twist);
Vector7 sim3_log(const Sim3Transform& s);

}  // namespace kpslam::geometry
