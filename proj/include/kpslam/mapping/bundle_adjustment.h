#pragma once

#include <optional>
#include <set>

#include "kpslam/map/global_map.h"
#include "kpslam/optim/solver.h"

namespace kpslam::mapping {

struct BundleAdjustOptions {
  double huber_delta = 2.45;  // pixels, after dividing by the octave scale
  double chi2_threshold = 5.99;
  int max_iterations = 10;
  bool remove_outliers = true;  // erase observations above chi2 after the solve
};

struct BundleAdjustResult {
  optim::SolveReport report;
  int n_free_keyframes = 0;
  int n_fixed_keyframes = 0;
  int n_points = 0;
  int removed_observations = 0;
};

/// Reprojection residual of one observation, whitened by scale^octave.
geometry::Vector2 reprojection_error(const map::GlobalMap& map, map::MapPointId point,
                                     map::KeyFrameId kf, const geometry::CameraIntrinsics& K);

/// Jointly refines the poses in `free_kfs` and `points`; every other keyframe
/// observing those points enters as a fixed pose. Writes the result back into
/// the map. Throws kIllPosedProblem if no keyframe is held fixed.
BundleAdjustResult bundle_adjust(map::GlobalMap& map, const std::set<map::KeyFrameId>& free_kfs,
                                 const std::set<map::KeyFrameId>& fixed_kfs,
                                 const std::set<map::MapPointId>& points,
                                 const geometry::CameraIntrinsics& K,
                                 const BundleAdjustOptions& options = {});

/// Center keyframe plus its covisible neighbours. Keyframes outside that set
/// that observe the same points are fixed anchors; with no anchors the first
/// keyframe of the map is held fixed when it is part of the set. Empty when
/// the problem has fewer than two keyframes or no fixed one.
std::optional<BundleAdjustResult> local_bundle_adjust(map::GlobalMap& map, map::KeyFrameId center,
                                                      const geometry::CameraIntrinsics& K,
                                                      const BundleAdjustOptions& options = {});

/// All keyframes and points; the first keyframe is fixed.
std::optional<BundleAdjustResult> global_bundle_adjust(map::GlobalMap& map,
                                                       const geometry::CameraIntrinsics& K,
                                                       const BundleAdjustOptions& options = {});

}  // namespace kpslam::mapping
