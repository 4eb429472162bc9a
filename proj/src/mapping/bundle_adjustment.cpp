#include "kpslam/mapping/bundle_adjustment.h"

#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::mapping {

using geometry::SE3Pose;
using geometry::Vector2;
using geometry::Vector3;

namespace {

double octave_sigma(const map::KeyFrame& kf, int idx) {
  const double s = kf.pyramid ? kf.pyramid->scale_factor() : 1.0;
  return std::pow(s, kf.keypoints[idx].octave);
}

optim::ResidualBlock observation_block(optim::ParamId pose, optim::ParamId point, const Vector2& pixel,
                                       double sigma, const geometry::CameraIntrinsics& K,
                                       double huber_delta) {
  optim::ResidualBlock block;
  block.dim = 2;
  block.params = {pose, point};
  block.analytic_jacobian = true;
  block.huber_delta = huber_delta;
  block.fn = [pixel, sigma, &K](std::span<const double* const> params, Eigen::VectorXd& r,
                                optim::Jacobians* J) {
    const SE3Pose T = optim::ParameterStore::se3_from_data(params[0]);
    const Vector3 X(params[1][0], params[1][1], params[1][2]);
    const Vector3 p = T * X;
    if (p.z() <= 1e-6) {
      r = Eigen::Vector2d::Constant(1e3);
      if (J) {
        (*J)[0].setZero(2, 6);
        (*J)[1].setZero(2, 3);
      }
      return;
    }
    r = (pixel - geometry::project_unchecked(K, p)) / sigma;
    if (J) {
      (*J)[0] = -geometry::projection_pose_jacobian(K, p) / sigma;
      (*J)[1] = -geometry::projection_jacobian(K, p) * T.rotation_matrix() / sigma;
    }
  };
  return block;
}

}  // namespace

Vector2 reprojection_error(const map::GlobalMap& map, map::MapPointId point, map::KeyFrameId kf,
                           const geometry::CameraIntrinsics& K) {
  const map::KeyFrame& k = map.keyframe(kf);
  const map::MapPoint& p = map.point(point);
  const int idx = p.observations.at(kf);
  const Vector3 pc = k.pose * p.position;
  if (pc.z() <= 1e-6) return Vector2::Constant(std::numeric_limits<double>::infinity());
  return (k.keypoints[idx].position - geometry::project_unchecked(K, pc)) / octave_sigma(k, idx);
}

BundleAdjustResult bundle_adjust(map::GlobalMap& map, const std::set<map::KeyFrameId>& free_kfs,
                                 const std::set<map::KeyFrameId>& fixed_kfs,
                                 const std::set<map::MapPointId>& points,
                                 const geometry::CameraIntrinsics& K, const BundleAdjustOptions& options) {
  optim::ParameterStore store;
  std::map<map::KeyFrameId, optim::ParamId> pose_ids;
  std::map<map::MapPointId, optim::ParamId> point_ids;
  auto pose_param = [&](map::KeyFrameId kf) {
    auto it = pose_ids.find(kf);
    if (it != pose_ids.end()) return it->second;
    const optim::ParamId id = store.add_se3(map.keyframe(kf).pose);
    if (!free_kfs.count(kf)) store.set_fixed(id);
    pose_ids[kf] = id;
    return id;
  };
  for (map::KeyFrameId kf : free_kfs) pose_param(kf);
  for (map::KeyFrameId kf : fixed_kfs) {
    if (!free_kfs.count(kf) && map.has_keyframe(kf)) pose_param(kf);
  }

  std::vector<optim::ResidualBlock> blocks;
  for (map::MapPointId pid : points) {
    if (!map.has_point(pid)) continue;
    const map::MapPoint& p = map.point(pid);
    const optim::ParamId x = store.add_point(p.position);
    point_ids[pid] = x;
    for (const auto& [kf, idx] : p.observations) {
      const map::KeyFrame& k = map.keyframe(kf);
      blocks.push_back(observation_block(pose_param(kf), x, k.keypoints[idx].position, octave_sigma(k, idx),
                                         K, options.huber_delta));
    }
  }

  BundleAdjustResult result;
  for (const auto& [kf, id] : pose_ids) {
    if (store.is_fixed(id)) {
      ++result.n_fixed_keyframes;
    } else {
      ++result.n_free_keyframes;
    }
  }
  result.n_points = static_cast<int>(point_ids.size());
  if (result.n_fixed_keyframes == 0) {
    throw Error(ErrorCode::kIllPosedProblem, "bundle adjustment: no fixed keyframe, gauge is free");
  }
  optim::SolverOptions solver;
  solver.max_iterations = options.max_iterations;
  result.report = optim::solve(blocks, store, solver);

  for (const auto& [kf, id] : pose_ids) {
    if (!store.is_fixed(id)) map.keyframe(kf).pose = store.se3(id);
  }
  for (const auto& [pid, id] : point_ids) map.point(pid).position = store.point(id);

  if (options.remove_outliers) {
    for (const auto& [pid, id] : point_ids) {
      if (!map.has_point(pid)) continue;
      std::vector<map::KeyFrameId> bad;
      for (const auto& [kf, idx] : map.point(pid).observations) {
        if (reprojection_error(map, pid, kf, K).squaredNorm() > options.chi2_threshold) bad.push_back(kf);
      }
      for (map::KeyFrameId kf : bad) {
        if (!map.has_point(pid)) break;
        map.erase_observation(pid, kf);
        ++result.removed_observations;
      }
    }
  }
  return result;
}

std::optional<BundleAdjustResult> local_bundle_adjust(map::GlobalMap& map, map::KeyFrameId center,
                                                      const geometry::CameraIntrinsics& K,
                                                      const BundleAdjustOptions& options) {
  std::set<map::KeyFrameId> local = {center};
  for (map::KeyFrameId kf : map.covisible(center)) local.insert(kf);
  std::set<map::MapPointId> points;
  for (map::KeyFrameId kf : local) {
    for (map::MapPointId pid : map.keyframe(kf).map_point_links) {
      if (pid != map::kNone) points.insert(pid);
    }
  }
  std::set<map::KeyFrameId> anchors;
  for (map::MapPointId pid : points) {
    for (const auto& [kf, idx] : map.point(pid).observations) {
      if (!local.count(kf)) anchors.insert(kf);
    }
  }
  if (anchors.empty() && local.count(map.first_keyframe_id())) {
    anchors.insert(map.first_keyframe_id());
    local.erase(map.first_keyframe_id());
  }
  if (anchors.empty() || local.empty() || local.size() + anchors.size() < 2) return std::nullopt;
  return bundle_adjust(map, local, anchors, points, K, options);
}

std::optional<BundleAdjustResult> global_bundle_adjust(map::GlobalMap& map, const geometry::CameraIntrinsics& K,
                                                       const BundleAdjustOptions& options) {
  if (map.n_keyframes() < 2) return std::nullopt;
  std::set<map::KeyFrameId> free, fixed = {map.first_keyframe_id()};
  for (const auto& [id, kf] : map.keyframes()) {
    if (id != map.first_keyframe_id()) free.insert(id);
  }
  std::set<map::MapPointId> points;
  for (const auto& [id, p] : map.points()) points.insert(id);
  return bundle_adjust(map, free, fixed, points, K, options);
}

}  // namespace kpslam::mapping
