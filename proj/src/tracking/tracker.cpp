#include "kpslam/tracking/tracker.h"

#include <optional>

#include "kpslam/common/error.h"

namespace kpslam::tracking {

using geometry::SE3Pose;

const char* status_name(TrackingStatus status) {
  switch (status) {
    case TrackingStatus::kInitializing: return "initializing";
    case TrackingStatus::kOk: return "ok";
    case TrackingStatus::kLost: return "lost";
  }
  return "unknown";
}

namespace {

struct Attempt {
  ProjectionResult projection;
  RefineResult refined;
};

Attempt attempt(const map::Frame& reference, const map::Frame& current, const SE3Pose& pose_init,
                double radius, const map::GlobalMap& map, const geometry::CameraIntrinsics& K,
                const TrackerOptions& options) {
  Attempt a;
  a.projection = match_by_projection(reference, current, pose_init, radius, map, K, options.max_hamming);
  a.refined = refine_pose(current, a.projection.matches, pose_init, map, K, options.refine);
  return a;
}

}  // namespace

TrackingState track_frame(const TrackingState& state, map::Frame& current, const map::GlobalMap& map,
                          const geometry::CameraIntrinsics& K, const TrackerOptions& options) {
  TrackingState next = state;
  next.frames_since_keyframe = state.frames_since_keyframe + 1;
  next.coarse_failed = false;
  next.used_reference_retry = false;
  next.failure.clear();
  current.map_point_links.assign(current.size(), map::kNone);

  const map::Frame& last = state.last;
  const SE3Pose predicted = state.has_velocity ? state.velocity : SE3Pose();
  SE3Pose coarse = predicted;
  if (options.use_coarse_alignment) {
    try {
      const std::vector<AlignmentPoint> points = alignment_points(last, map);
      if (static_cast<int>(points.size()) < options.coarse.min_blocks) {
        throw Error(ErrorCode::kCoarseAlignmentFailed, "coarse alignment: too few map points in the last frame");
      }
      coarse = coarse_align(last, current, points, predicted, K, options.coarse);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCoarseAlignmentFailed) throw;
      next.coarse_failed = true;
      coarse = predicted;
    }
  }
  const SE3Pose pose_init = predict_initial_pose(coarse, last.pose);

  std::optional<Attempt> result;
  if (!next.coarse_failed) {
    try {
      result = attempt(last, current, pose_init, options.search_radius, map, K, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTrackingLost) throw;
      next.failure = e.what();
    }
  }
  if (!result && map.has_keyframe(state.reference_kf)) {
    next.used_reference_retry = true;
    try {
      result = attempt(map.keyframe(state.reference_kf), current, pose_init, 2.0 * options.search_radius,
                       map, K, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTrackingLost) throw;
      next.failure = e.what();
    }
  }
  if (!result) {
    next.status = TrackingStatus::kLost;
    next.tracked = 0;
    next.has_velocity = false;
    if (next.failure.empty()) next.failure = "tracking lost: no reference to match against";
    return next;
  }

  current.pose = result->refined.pose;
  const std::vector<ProjectionMatch>& matches = result->projection.matches;
  for (size_t i = 0; i < matches.size(); ++i) {
    if (result->refined.inlier[i]) current.map_point_links[matches[i].keypoint] = matches[i].point;
  }
  next.projected_points = std::move(result->projection.projected_points);
  next.coarse = coarse;
  next.velocity = current.pose * last.pose.inverse();
  next.has_velocity = true;
  next.tracked = result->refined.n_inliers;
  next.status = TrackingStatus::kOk;
  next.last = current;
  return next;
}

bool need_keyframe(const TrackingState& state, const map::GlobalMap& map, const TrackerOptions& options) {
  if (state.frames_since_keyframe >= options.keyframe_max_interval) return true;
  if (!map.has_keyframe(state.reference_kf)) return true;
  const map::KeyFrame& ref = map.keyframe(state.reference_kf);
  int reference_points = 0;
  for (map::MapPointId id : ref.map_point_links) {
    if (map.resolve(id) != map::kNone) ++reference_points;
  }
  return state.tracked < options.keyframe_ratio * reference_points;
}

}  // namespace kpslam::tracking
