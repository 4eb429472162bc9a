#pragma once

#include <string>
#include <vector>

#include "kpslam/tracking/coarse_alignment.h"
#include "kpslam/tracking/pose_refinement.h"
#include "kpslam/tracking/projection_matcher.h"

namespace kpslam::tracking {

struct TrackerOptions {
  double search_radius = 7.0;  // pixels
  int max_hamming = kDefaultMaxHamming;
  bool use_coarse_alignment = true;  // false: constant-velocity prediction only
  CoarseAlignmentOptions coarse;
  RefineOptions refine;
  int keyframe_max_interval = 20;
  double keyframe_ratio = 0.9;
};

enum class TrackingStatus { kInitializing, kOk, kLost };

const char* status_name(TrackingStatus status);

struct TrackingState {
  map::Frame last;  // last successfully tracked frame
  map::KeyFrameId reference_kf = map::kNone;
  geometry::SE3Pose coarse;  // T_cl used for the last frame
  int tracked = 0;           // refine_pose inliers of the last frame
  TrackingStatus status = TrackingStatus::kInitializing;

  geometry::SE3Pose velocity;  // T_cl of the last successful step
  bool has_velocity = false;
  int frames_since_keyframe = 0;
  bool coarse_failed = false;
  bool used_reference_retry = false;
  std::vector<map::MapPointId> projected_points;  // visible in the last attempt
  std::string failure;
};

/// Coarse alignment, pose prediction, projection matching and pose
/// refinement. When coarse alignment fails or refinement loses track the
/// frame is matched against the reference keyframe with twice the radius.
/// Sets current.pose and its map point links to the refinement inliers.
/// Never throws for tracking failures; status becomes kLost instead.
TrackingState track_frame(const TrackingState& state, map::Frame& current, const map::GlobalMap& map,
                          const geometry::CameraIntrinsics& K, const TrackerOptions& options = {});

/// Interval rule or tracked < ratio * (map points of the reference keyframe).
bool need_keyframe(const TrackingState& state, const map::GlobalMap& map,
                   const TrackerOptions& options = {});

}  // namespace kpslam::tracking
