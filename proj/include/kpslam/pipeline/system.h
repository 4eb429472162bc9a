#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kpslam/map/global_map.h"
#include "kpslam/pipeline/config.h"
#include "kpslam/pipeline/sequence.h"
#include "kpslam/pipeline/trajectory_io.h"

namespace kpslam::pipeline {

struct FrameRecord {
  std::uint64_t id = 0;
  double timestamp = 0.0;
  tracking::TrackingStatus status = tracking::TrackingStatus::kInitializing;
  bool has_pose = false;    // false before initialization and while lost
  geometry::SE3Pose pose;   // world to camera, as estimated when the frame was tracked
  map::KeyFrameId reference_kf = map::kNone;
  geometry::SE3Pose relative;  // pose * reference pose^-1 at tracking time
  bool keyframe = false;
  int tracked = 0;  // map points matched
};

struct RunResult {
  std::vector<FrameRecord> frames;
  map::GlobalMap map;
  std::vector<std::string> loop_log;  // loop_log_line per loop candidate
  int loops_accepted = 0;
  int loops_applied = 0;
  map::KeyFrameId first_loop_kf = map::kNone;  // current keyframe of the first applied correction
  std::uint64_t first_loop_frame = 0;

  /// Poses as emitted frame by frame (camera to world), lost frames omitted.
  Trajectory online_trajectory() const;
  /// Each frame re-expressed through its reference keyframe's final pose, so
  /// bundle adjustment and loop corrections carry over to every frame.
  Trajectory final_trajectory() const;
  int n_lost() const;
};

using FrameCallback = std::function<void(const FrameRecord&)>;

/// Per frame: read image and features, initialize or track, and on new
/// keyframes run local mapping and, when enabled, loop detection and
/// correction. Runs single-threaded; results depend only on the source and
/// the config. Input errors (unreadable images, malformed sidecar) throw;
/// tracking loss is recorded in the frame flags and the run continues.
RunResult run_sequence(const SequenceSource& source, const SystemConfig& config,
                       const FrameCallback& on_frame = {});

/// Ground truth of a source as camera-to-world poses, when available.
std::optional<Trajectory> source_ground_truth(const SequenceSource& source);

/// trajectory.txt (final, TUM), trajectory_online.txt, trajectory_kitti.txt,
/// frames.txt (`id timestamp status has_pose keyframe tracked`),
/// keyframes.txt (`kf_id frame_id timestamp`), loops.txt, map.txt,
/// config.txt and groundtruth.txt when the source has ground truth.
void write_run(const std::filesystem::path& dir, const RunResult& result, const SequenceSource& source,
               const SystemConfig& config);

}  // namespace kpslam::pipeline
