#pragma once

#include <utility>
#include <vector>

#include "kpslam/geometry/sim3.h"
#include "kpslam/pipeline/trajectory_io.h"

namespace kpslam::pipeline {

inline constexpr double kDefaultMaxTimeDifference = 0.02;  // seconds

struct EvalResult {
  double ate_rmse = 0.0;  // trajectory units
  double t_rel = 0.0;     // percent
  double r_rel = 0.0;     // degrees per 100 length units (deg/100m for metric input)
  geometry::Sim3Transform alignment;  // applied to the estimate
  int n_pairs = 0;
  int n_segments = 0;
};

/// (estimate index, ground-truth index) of each estimate pose whose nearest
/// ground-truth timestamp lies within `max_dt`, in estimate order.
std::vector<std::pair<int, int>> associate(const Trajectory& est, const Trajectory& gt,
                                           double max_dt = kDefaultMaxTimeDifference);

/// Umeyama alignment of the camera centres (with scale iff
/// `monocular_scale`), then RMSE of the translation residuals. Throws
/// kTooFewPairs below three associated pairs.
EvalResult eval_ate(const Trajectory& est, const Trajectory& gt, bool monocular_scale,
                    double max_dt = kDefaultMaxTimeDifference);

enum class RelAlignment { kNone, kRigid, kSimilarity };

struct RelOptions {
  std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  double per_length = 100.0;  // r_rel is reported per this distance
  RelAlignment alignment = RelAlignment::kNone;
  double max_dt = kDefaultMaxTimeDifference;
};

/// Sub-lengths {1..8} scene units for unit-scale synthetic sequences.
RelOptions synthetic_rel_options();

/// Odometry protocol: for every start frame and sub-length, the segment ends
/// at the first frame farther along the ground-truth path than the length;
/// errors of the relative motion are divided by the length and averaged over
/// all segments. Throws kTooShortSequence when the path is shorter than the
/// smallest sub-length, kTooFewPairs below two associated pairs.
EvalResult eval_rel(const Trajectory& est, const Trajectory& gt, const RelOptions& options = {});

/// S applied to a camera-to-world pose: rotation R_s R, centre S(c).
geometry::SE3Pose transform_pose(const geometry::Sim3Transform& S, const geometry::SE3Pose& camera_to_world);

}  // namespace kpslam::pipeline
