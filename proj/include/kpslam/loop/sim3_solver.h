#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "kpslam/geometry/sim3.h"
#include "kpslam/map/global_map.h"

namespace kpslam::loop {

/// One 3D-3D match between two cameras, each point in its own camera frame,
/// with the pixel it was observed at and that observation's sigma.
struct Sim3Correspondence {
  geometry::Vector3 x1;
  geometry::Vector2 px1;
  double sigma1 = 1.0;
  geometry::Vector3 x2;
  geometry::Vector2 px2;
  double sigma2 = 1.0;
};

struct Sim3Options {
  int ransac_iterations = 200;
  double chi2_threshold = 5.99;
  int min_inliers = 20;
  int refine_iterations = 10;
  double guided_radius = 10.0;  // pixels at octave 0
  int max_hamming = 64;
  std::uint64_t seed = 0;
};

struct Sim3Estimate {
  geometry::Sim3Transform S12;  // camera 2 coordinates -> camera 1 coordinates
  std::vector<bool> inliers;
  int n_inliers = 0;
};

/// RANSAC over minimal 3-point similarity fits, inliers reprojecting within
/// chi2 in both cameras, then Levenberg-Marquardt over the inliers. Empty when
/// no hypothesis is found or fewer than min_inliers survive the refinement.
std::optional<Sim3Estimate> estimate_sim3(const std::vector<Sim3Correspondence>& matches,
                                          const geometry::CameraIntrinsics& K, const Sim3Options& options = {});

/// Inlier mask of a similarity under the two-view chi2 test.
std::vector<bool> sim3_inliers(const std::vector<Sim3Correspondence>& matches, const geometry::Sim3Transform& S12,
                               const geometry::CameraIntrinsics& K, double chi2);

struct LoopMatch {
  int keypoint = -1;                  // in the current keyframe
  map::MapPointId point = map::kNone;  // on the loop side
};

struct LoopSim3 {
  geometry::Sim3Transform S_cm;  // loop keyframe camera -> current keyframe camera
  geometry::Sim3Transform S_cw;  // world -> corrected current camera
  int n_inliers = 0;
  std::vector<LoopMatch> matches;  // refined inliers plus the guided pass
};

/// Similarity between the current keyframe and a loop keyframe from keypoint
/// matches (current index, loop index) whose keypoints both carry map points.
/// On success the points of the loop keyframe and its covisible neighbours are
/// projected into the current keyframe to collect more matches and the
/// similarity is refined once more over all of them.
std::optional<LoopSim3> compute_sim3(const map::GlobalMap& map, map::KeyFrameId current, map::KeyFrameId loop,
                                     const std::vector<std::pair<int, int>>& keypoint_matches,
                                     const geometry::CameraIntrinsics& K, const Sim3Options& options = {});

}  // namespace kpslam::loop
