#pragma once

#include <vector>

#include "kpslam/map/global_map.h"

namespace kpslam::tracking {

inline constexpr int kDefaultMaxHamming = 64;

struct ProjectionMatch {
  map::MapPointId point = map::kNone;
  int keypoint = -1;  // index into the current frame
  int distance = 0;   // Hamming bits
};

struct ProjectionResult {
  std::vector<ProjectionMatch> matches;          // ordered by map point id
  std::vector<map::MapPointId> projected_points;  // landed inside the current image
};

/// Projects each map point linked in `reference` with pose_init and takes the
/// current keypoint of minimum Hamming distance to the reference keypoint's
/// descriptor within `radius` (same or adjacent octave). On conflicts the
/// lower-distance claimant keeps the keypoint.
ProjectionResult match_by_projection(const map::Frame& reference, const map::Frame& current,
                                     const geometry::SE3Pose& pose_init, double radius,
                                     const map::GlobalMap& map, const geometry::CameraIntrinsics& K,
                                     int max_hamming = kDefaultMaxHamming);

}  // namespace kpslam::tracking
