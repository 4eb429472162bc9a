#include "kpslam/tracking/pose_refinement.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kpslam/common/error.h"

namespace kpslam::tracking {

using geometry::SE3Pose;
using geometry::Vector2;
using geometry::Vector3;

namespace {

// Whitened reprojection residual (u - pi(T X)) / sigma.
optim::ResidualBlock reprojection_block(optim::ParamId pose_id, const PoseObservation& obs,
                                        const geometry::CameraIntrinsics& K, double huber_delta) {
  optim::ResidualBlock block;
  block.dim = 2;
  block.params = {pose_id};
  block.analytic_jacobian = true;
  block.huber_delta = huber_delta;
  block.fn = [obs, &K](std::span<const double* const> params, Eigen::VectorXd& r,
                       optim::Jacobians* J) {
    const Vector3 p = optim::ParameterStore::se3_from_data(params[0]) * obs.point;
    if (p.z() <= 1e-6) {
      // behind the camera: a large constant residual with no descent direction
      r = Eigen::Vector2d::Constant(1e3);
      if (J) (*J)[0].setZero(2, 6);
      return;
    }
    r = (obs.pixel - geometry::project_unchecked(K, p)) / obs.sigma;
    if (J) (*J)[0] = -geometry::projection_pose_jacobian(K, p) / obs.sigma;
  };
  return block;
}

double chi2(const PoseObservation& obs, const SE3Pose& T, const geometry::CameraIntrinsics& K) {
  const Vector3 p = T * obs.point;
  if (p.z() <= 1e-6) return std::numeric_limits<double>::infinity();
  return ((obs.pixel - geometry::project_unchecked(K, p)) / obs.sigma).squaredNorm();
}

}  // namespace

RefineResult refine_pose(const std::vector<PoseObservation>& observations, const SE3Pose& pose_init,
                         const geometry::CameraIntrinsics& K, const RefineOptions& options) {
  const int n = static_cast<int>(observations.size());
  if (n < options.min_inliers) {
    throw Error(ErrorCode::kTrackingLost,
                "pose refinement: " + std::to_string(n) + " matches, need " +
                    std::to_string(options.min_inliers));
  }
  RefineResult result;
  result.pose = pose_init;
  result.inlier.assign(n, true);
  for (int round = 0; round < options.rounds; ++round) {
    optim::ParameterStore store;
    const optim::ParamId pose_id = store.add_se3(result.pose);
    std::vector<optim::ResidualBlock> blocks;
    for (int i = 0; i < n; ++i) {
      if (result.inlier[i]) blocks.push_back(reprojection_block(pose_id, observations[i], K, options.huber_delta));
    }
    if (static_cast<int>(blocks.size()) < options.min_inliers) break;
    optim::SolverOptions solver;
    solver.max_iterations = options.iterations_per_round;
    result.reports.push_back(optim::solve(blocks, store, solver));
    result.pose = store.se3(pose_id);
    for (int i = 0; i < n; ++i) {
      result.inlier[i] = chi2(observations[i], result.pose, K) <= options.chi2_threshold;
    }
  }
  result.n_inliers = static_cast<int>(std::count(result.inlier.begin(), result.inlier.end(), true));
  if (result.n_inliers < options.min_inliers) {
    throw Error(ErrorCode::kTrackingLost,
                "pose refinement: " + std::to_string(result.n_inliers) + " inliers left");
  }
  return result;
}

RefineResult refine_pose(const map::Frame& current, const std::vector<ProjectionMatch>& matches,
                         const SE3Pose& pose_init, const map::GlobalMap& map,
                         const geometry::CameraIntrinsics& K, const RefineOptions& options) {
  std::vector<PoseObservation> obs;
  obs.reserve(matches.size());
  const double scale_factor = current.pyramid ? current.pyramid->scale_factor() : 1.0;
  for (const ProjectionMatch& m : matches) {
    const features::Keypoint& kp = current.keypoints.at(m.keypoint);
    obs.push_back({map.point(m.point).position, kp.position, std::pow(scale_factor, kp.octave)});
  }
  return refine_pose(obs, pose_init, K, options);
}

}  // namespace kpslam::tracking
