#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpslam/map/frame.h"
#include "kpslam/pipeline/evaluation.h"

namespace kpslam::pipeline {

/// Estimate aligned onto the ground truth as in eval_ate, one row per
/// associated pair: `timestamp gt_x gt_y gt_z est_x est_y est_z`, after a
/// header line.
void write_trajectory_overlay(std::ostream& out, const Trajectory& est, const Trajectory& gt, bool with_scale,
                              double max_dt = kDefaultMaxTimeDifference);

/// One loop candidate proposed for a query keyframe, judged against ground truth.
struct LoopDetection {
  map::KeyFrameId query = map::kNone;
  map::KeyFrameId candidate = map::kNone;
  double score = 0.0;
  bool correct = false;
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// One row per distinct score, ascending. At threshold t every detection
/// scoring at least t is reported: precision is the correct fraction of
/// those, recall the fraction of the `n_positive_queries` revisit queries
/// with a correct reported detection.
std::vector<PrPoint> pr_sweep(const std::vector<LoopDetection>& detections, int n_positive_queries);

/// Highest recall among rows with precision 1, 0 when there are none.
double recall_at_full_precision(const std::vector<PrPoint>& curve);

/// Header `threshold precision recall`, then the rows.
void write_pr_curve(std::ostream& out, const std::vector<PrPoint>& curve);

/// Record of a loop log line `kf candidate score n_gms n_inliers verdict`.
struct LoopLogRecord {
  map::KeyFrameId kf = map::kNone;
  map::KeyFrameId candidate = map::kNone;
  double score = 0.0;
  int n_gms = 0;
  int n_inliers = 0;
  std::string verdict;
};

std::vector<LoopLogRecord> read_loop_log(const std::filesystem::path& path);

struct RunPlotOptions {
  double loop_radius = 1.0;           // ground-truth centre distance of a true revisit
  double loop_max_angle_deg = 45.0;   // and viewing direction difference
  int recent_exclusion = 10;          // revisits closer in keyframe index are not counted
  bool with_scale = true;
};

/// Reads trajectory.txt, keyframes.txt, loops.txt and groundtruth.txt from a
/// run directory and writes trajectory_xyz.txt and pr.txt next to them.
/// Without ground truth only an empty-header PR file is possible and no
/// overlay is written. Returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& run_dir, const RunPlotOptions& options = {});

}  // namespace kpslam::pipeline
