#pragma once

#include <vector>

#include "kpslam/map/global_map.h"
#include "kpslam/optim/solver.h"
#include "kpslam/tracking/projection_matcher.h"

namespace kpslam::tracking {

struct RefineOptions {
  double huber_delta = 2.45;  // pixels
  double chi2_threshold = 5.99;
  int rounds = 4;
  int iterations_per_round = 20;
  int min_inliers = 10;
};

/// One 2D-3D correspondence with the pixel noise scale of its octave.
struct PoseObservation {
  geometry::Vector3 point = geometry::Vector3::Zero();  // world
  geometry::Vector2 pixel = geometry::Vector2::Zero();
  double sigma = 1.0;
};

struct RefineResult {
  geometry::SE3Pose pose;
  int n_inliers = 0;
  std::vector<bool> inlier;  // per observation
  std::vector<optim::SolveReport> reports;
};

/// Pose-only LM on reprojection residuals, alternating optimization and
/// chi-square reclassification. Outliers are left out of the next round but
/// may come back. Throws kTrackingLost with fewer than min_inliers matches
/// before or inliers after.
RefineResult refine_pose(const std::vector<PoseObservation>& observations,
                         const geometry::SE3Pose& pose_init, const geometry::CameraIntrinsics& K,
                         const RefineOptions& options = {});

/// Builds observations from matches (sigma = scale^octave) and refines.
RefineResult refine_pose(const map::Frame& current, const std::vector<ProjectionMatch>& matches,
                         const geometry::SE3Pose& pose_init, const map::GlobalMap& map,
                         const geometry::CameraIntrinsics& K, const RefineOptions& options = {});

}  // namespace kpslam::tracking
