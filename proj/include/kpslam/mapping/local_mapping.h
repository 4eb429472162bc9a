#pragma once

#include <optional>
#include <vector>

#include "kpslam/map/global_map.h"
#include "kpslam/mapping/bundle_adjustment.h"

namespace kpslam::mapping {

struct LocalMappingOptions {
  int max_neighbours = 10;           // covisible keyframes used for triangulation and fusion
  int max_hamming = 64;
  double epipolar_threshold = 3.84;  // pixels at octave 0, scaled by scale^octave
  double min_parallax_deg = 0.5;
  double chi2_threshold = 5.99;
  double min_baseline_ratio = 0.01;  // baseline / median scene depth below this skips the pair
  double fuse_radius = 3.0;          // pixels at octave 0
  double min_found_ratio = 0.25;
  int min_observations = 2;
  int grace_keyframes = 3;
  bool run_bundle_adjustment = true;
  BundleAdjustOptions ba;
};

struct LocalMappingReport {
  map::KeyFrameId keyframe = map::kNone;
  int created = 0;
  int fused = 0;
  int culled = 0;
  std::optional<BundleAdjustResult> ba;
};

/// Stores a tracked frame as a keyframe; its links become observations.
map::KeyFrameId insert_keyframe(map::GlobalMap& map, const map::Frame& frame);

/// Triangulates unlinked keypoints of `kf` against unlinked keypoints of its
/// covisible neighbours. Returns the number of new points.
int create_map_points(map::GlobalMap& map, map::KeyFrameId kf, const geometry::CameraIntrinsics& K,
                      const LocalMappingOptions& options = {});

/// Projects the points of `points` into `target` and links each to the
/// nearest compatible keypoint. A keypoint already linked to another point
/// merges the two, keeping the one with more observations. Returns the number
/// of observations added or points merged.
int fuse_points(map::GlobalMap& map, map::KeyFrameId target, const std::vector<map::MapPointId>& points,
                const geometry::CameraIntrinsics& K, const LocalMappingOptions& options = {});

/// Fuses the neighbours' points into `kf` and the points of `kf` into the neighbours.
int fuse_with_neighbours(map::GlobalMap& map, map::KeyFrameId kf, const geometry::CameraIntrinsics& K,
                         const LocalMappingOptions& options = {});

/// After the grace period, removes points with a found/visible ratio below the
/// threshold or too few observing keyframes.
int cull_map_points(map::GlobalMap& map, const LocalMappingOptions& options = {});

/// Insert, create, fuse, local bundle adjustment, cull.
LocalMappingReport process_keyframe(map::GlobalMap& map, const map::Frame& frame,
                                    const geometry::CameraIntrinsics& K,
                                    const LocalMappingOptions& options = {});

}  // namespace kpslam::mapping
