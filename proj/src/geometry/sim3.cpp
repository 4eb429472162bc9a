#include "kpslam/geometry/sim3.h"

#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::geometry {

namespace {

constexpr double kEps = 1e-8;

// Translation Jacobian W of the Sim(3) exponential.
Matrix3 calc_w(const Vector3& omega, double sigma) {
  const double theta = omega.norm();
  const Matrix3 Omega = skew(omega);
  const Matrix3 Omega2 = Omega * Omega;
  const double scale = std::exp(sigma);
  double A, B, C;
  if (std::abs(sigma) < kEps) {
    C = 1.0;
    if (theta < kEps) {
      A = 0.5;
      B = 1.0 / 6.0;
    } else {
      const double t2 = theta * theta;
      A = (1.0 - std::cos(theta)) / t2;
      B = (theta - std::sin(theta)) / (t2 * theta);
    }
  } else {
    C = (scale - 1.0) / sigma;
    if (theta < kEps) {
      const double s2 = sigma * sigma;
      A = ((sigma - 1.0) * scale + 1.0) / s2;
      B = (scale * 0.5 * s2 + scale - 1.0 - sigma * scale) / (s2 * sigma);
    } else {
      const double t2 = theta * theta;
      const double a = scale * std::sin(theta);
      const double b = scale * std::cos(theta);
      const double c = t2 + sigma * sigma;
      A = (a * sigma + (1.0 - b) * theta) / (theta * c);
      B = (C - ((b - 1.0) * sigma + a * theta) / c) / t2;
    }
  }
  return A * Omega + B * Omega2 + C * Matrix3::Identity();
}

}  // namespace

Sim3Transform::Sim3Transform(double scale, const Eigen::Quaterniond& rotation,
                             const Vector3& translation)
    : scale_(scale), rotation_(rotation.normalized()), translation_(translation) {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "Sim3Transform: scale must be positive");
  }
}

Sim3Transform Sim3Transform::inverse() const {
  const Eigen::Quaterniond qi = rotation_.conjugate();
  const double si = 1.0 / scale_;
  return Sim3Transform(si, qi, -si * (qi * translation_));
}

Sim3Transform compose(const Sim3Transform& a, const Sim3Transform& b) {
  return Sim3Transform(a.scale() * b.scale(), (a.rotation() * b.rotation()).normalized(),
                       a.scale() * (a.rotation() * b.translation()) + a.translation());
}

Sim3Transform sim3_exp(const Vector7& twist) {
  const Vector3 rho = twist.head<3>();
  const Vector3 omega = twist.segment<3>(3);
  const double sigma = twist(6);
  return Sim3Transform(std::exp(sigma), so3_exp(omega), calc_w(omega, sigma) * rho);
}

Vector7 sim3_log(const Sim3Transform& s) {
  const Vector3 omega = so3_log(s.rotation());
  const double sigma = std::log(s.scale());
  Vector7 out;
  out.head<3>() = calc_w(omega, sigma).inverse() * s.translation();
  out.segment<3>(3) = omega;
  out(6) = sigma;
  return out;
}

}  // namespace kpslam::geometry
