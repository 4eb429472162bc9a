#include "kpslam/geometry/pose_format.h"

#include <cstdio>

namespace kpslam::geometry {

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_tum_pose(double timestamp, const SE3Pose& twc) {
  char ts[48];
  std::snprintf(ts, sizeof(ts), "%.9f", timestamp == 0.0 ? 0.0 : timestamp);
  Eigen::Quaterniond q = twc.rotation();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const Vector3& t = twc.translation();
  std::string out = ts;
  for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) {
    out += ' ';
    out += format_number(v);
  }
  return out;
}

std::string format_kitti_pose(const SE3Pose& twc) {
  const Eigen::Matrix4d m = twc.matrix();
  std::string out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r || c) out += ' ';
      out += format_number(m(r, c));
    }
  }
  return out;
}

}  // namespace kpslam::geometry
