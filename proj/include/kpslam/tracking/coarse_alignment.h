#pragma once

#include <vector>

#include "kpslam/geometry/camera.h"
#include "kpslam/map/global_map.h"
#include "kpslam/optim/solver.h"

namespace kpslam::tracking {

struct CoarseAlignmentOptions {
  int patch_size = 4;
  double huber_delta = 20.0;  // intensity units, per pixel
  int max_iterations = 10;    // per pyramid level
  int min_blocks = 10;
  // Levels added above the frame pyramid (same downsampling) to widen the
  // convergence basin; 0 aligns over the frame pyramid only.
  int extra_levels = 1;
  // After the finest level, patches with RMS residual above
  // max(trim_floor, trim_factor * median RMS) are dropped and the level is
  // solved again, up to trim_passes times. 0 passes disables.
  int trim_passes = 3;
  double trim_factor = 3.0;
  double trim_floor = 1.0;  // intensity units
};

/// A point seen by the last frame, expressed in the last camera's coordinates.
struct AlignmentPoint {
  geometry::Vector3 p_last = geometry::Vector3::Zero();
  int octave = 0;
};

/// Linked keypoints of `last` whose map point lies in front of the camera.
std::vector<AlignmentPoint> alignment_points(const map::Frame& last, const map::GlobalMap& map);

/// Relative pose T_cl minimizing the photometric error of small patches around
/// the projected points, coarse to fine over the pyramid (top level first).
/// Patches are sampled at pyramid level max(level, octave). Throws
/// kCoarseAlignmentFailed when fewer than min_blocks patches survive the
/// border check at some level.
geometry::SE3Pose coarse_align(const map::Frame& last, const map::Frame& current,
                               const std::vector<AlignmentPoint>& points,
                               const geometry::SE3Pose& init, const geometry::CameraIntrinsics& K,
                               const CoarseAlignmentOptions& options = {});

/// Patch residuals I_c(pi(T p) + o) - I_l(pi(p) + o) at one pyramid level,
/// concatenated over points whose patches are inside both images.
std::vector<double> photometric_residuals(const map::Frame& last, const map::Frame& current,
                                          const std::vector<AlignmentPoint>& points,
                                          const geometry::SE3Pose& T_cl,
                                          const geometry::CameraIntrinsics& K, int level,
                                          int patch_size = 4);

/// x_hat_cw = T_cl * T_lw. Identity arguments pass the other pose through
/// bit for bit.
geometry::SE3Pose predict_initial_pose(const geometry::SE3Pose& coarse,
                                       const geometry::SE3Pose& last_pose);

}  // namespace kpslam::tracking
