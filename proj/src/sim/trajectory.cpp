#include "kpslam/sim/trajectory.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kpslam/common/error.h"
#include "kpslam/sim/rng.h"

namespace kpslam::sim {

using geometry::SE3Pose;
using geometry::Vector3;

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "circle") return TrajectoryKind::kCircle;
  if (name == "square-loop") return TrajectoryKind::kSquareLoop;
  if (name == "straight") return TrajectoryKind::kStraight;
  if (name == "fast-rotation") return TrajectoryKind::kFastRotation;
  throw Error(ErrorCode::kConfigError, "unknown trajectory kind '" + name + "'");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kCircle: return "circle";
    case TrajectoryKind::kSquareLoop: return "square-loop";
    case TrajectoryKind::kStraight: return "straight";
    case TrajectoryKind::kFastRotation: return "fast-rotation";
  }
  return "unknown";
}

SE3Pose look_along(const Vector3& center, const Vector3& forward) {
  const Vector3 z = forward.normalized();
  Vector3 down = Vector3::UnitY() - Vector3::UnitY().dot(z) * z;
  if (down.norm() < 1e-9) down = Vector3::UnitZ() - Vector3::UnitZ().dot(z) * z;
  const Vector3 y = down.normalized();
  const Vector3 x = y.cross(z);
  geometry::Matrix3 r_wc;
  r_wc.col(0) = x;
  r_wc.col(1) = y;
  r_wc.col(2) = z;
  const geometry::Matrix3 r_cw = r_wc.transpose();
  return SE3Pose(r_cw, -r_cw * center);
}

namespace {

double signed_pow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

// Superellipse point and outward normal at parameter t.
void superellipse(double t, double r, double p, Vector3& point, Vector3& normal) {
  const double c = std::cos(t), s = std::sin(t);
  const double e = 2.0 / p;
  point = Vector3(r * signed_pow(c, e), 0.0, r * signed_pow(s, e));
  // gradient of |x|^p + |z|^p
  const Vector3 g(signed_pow(point.x() / r, p - 1.0), 0.0, signed_pow(point.z() / r, p - 1.0));
  normal = g.norm() > 1e-12 ? g.normalized() : Vector3(c, 0, s);
}

// Superellipse sampled at equal arc-length spacing; u in [0, 1) per lap.
class ArcLengthTable {
 public:
  ArcLengthTable(double r, double p) : r_(r), p_(p) {
    constexpr int kSamples = 20000;
    Vector3 prev, normal;
    superellipse(0.0, r, p, prev, normal);
    t_.push_back(0.0);
    s_.push_back(0.0);
    for (int i = 1; i <= kSamples; ++i) {
      const double t = 2.0 * M_PI * i / kSamples;
      Vector3 c;
      superellipse(t, r, p, c, normal);
      t_.push_back(t);
      s_.push_back(s_.back() + (c - prev).norm());
      prev = c;
    }
  }

  double parameter(double u) const {
    const double laps = std::floor(u);
    const double target = (u - laps) * s_.back();
    const auto it = std::lower_bound(s_.begin(), s_.end(), target);
    const size_t i = std::max<size_t>(1, it - s_.begin());
    const double f = (target - s_[i - 1]) / (s_[i] - s_[i - 1]);
    return 2.0 * M_PI * laps + t_[i - 1] + f * (t_[i] - t_[i - 1]);
  }

 private:
  double r_, p_;
  std::vector<double> t_, s_;
};

}  // namespace

std::vector<SE3Pose> gen_trajectory(const TrajectorySpec& spec) {
  if (spec.n_frames < 2) throw Error(ErrorCode::kInvalidArgument, "gen_trajectory: n_frames must be >= 2");
  std::vector<SE3Pose> poses;
  poses.reserve(spec.n_frames);
  const int n = spec.n_frames;
  for (int k = 0; k < n; ++k) {
    switch (spec.kind) {
      case TrajectoryKind::kCircle: {
        const double t = 2.0 * M_PI * spec.laps * k / n;
        const Vector3 c(spec.radius * std::cos(t), 0.0, spec.radius * std::sin(t));
        poses.push_back(look_along(c, -c));
        break;
      }
      case TrajectoryKind::kSquareLoop: {
        // frames 0 and n-1 sit at the start and after `laps` revolutions
        static thread_local std::unique_ptr<ArcLengthTable> table;
        static thread_local std::pair<double, double> table_key{-1.0, -1.0};
        if (!table || table_key != std::make_pair(spec.radius, spec.squareness)) {
          table = std::make_unique<ArcLengthTable>(spec.radius, spec.squareness);
          table_key = {spec.radius, spec.squareness};
        }
        const double t = table->parameter(spec.laps * k / (n - 1));
        Vector3 c, normal;
        superellipse(t, spec.radius, spec.squareness, c, normal);
        poses.push_back(look_along(c, normal));
        break;
      }
      case TrajectoryKind::kStraight:
        poses.push_back(look_along(Vector3(spec.speed * k, 0, 0), Vector3::UnitZ()));
        break;
      case TrajectoryKind::kFastRotation: {
        const double yaw = spec.yaw_amplitude_deg * M_PI / 180.0 *
                           std::sin(2.0 * M_PI * k / spec.yaw_period);
        const Vector3 forward(std::sin(yaw), 0.0, std::cos(yaw));
        poses.push_back(look_along(Vector3(spec.speed * k, 0, 0), forward));
        break;
      }
    }
  }
  if (spec.kind == TrajectoryKind::kSquareLoop && std::abs(spec.laps - std::round(spec.laps)) < 1e-12) {
    poses.back() = poses.front();
  }
  return poses;
}

std::vector<SE3Pose> perturb_odometry(const std::vector<SE3Pose>& poses, double drift_rate,
                                      std::uint64_t seed) {
  if (drift_rate < 0.0) throw Error(ErrorCode::kInvalidArgument, "perturb_odometry: negative drift rate");
  if (drift_rate == 0.0 || poses.empty()) return poses;
  Rng rng(mix_seed(seed, 0x6f646f6dull));
  std::vector<SE3Pose> out;
  out.reserve(poses.size());
  out.push_back(poses.front());
  for (size_t k = 1; k < poses.size(); ++k) {
    // relative motion T_k * T_{k-1}^-1 (world-to-camera chain)
    const SE3Pose rel = poses[k] * poses[k - 1].inverse();
    const double step = rel.translation().norm();
    const double sigma = drift_rate * step;
    geometry::Vector6 noise;
    for (int i = 0; i < 6; ++i) noise[i] = rng.normal(0.0, sigma);
    out.push_back(geometry::se3_exp(noise) * rel * out.back());
  }
  return out;
}

}  // namespace kpslam::sim
