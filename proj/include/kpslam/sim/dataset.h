#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kpslam/features/sidecar.h"
#include "kpslam/sim/renderer.h"
#include "kpslam/sim/trajectory.h"

namespace kpslam::sim {

struct SequenceSpec {
  std::uint64_t seed = 1;
  int n_landmarks = 2000;
  WorldBounds bounds;
  TrajectorySpec trajectory;
  geometry::CameraIntrinsics camera{380.0, 380.0, 319.5, 239.5, 640, 480};
  double frame_interval = 0.1;  // seconds
  double intensity_noise = 0.0;
  double keypoint_jitter = 0.0;   // pixels
  double descriptor_noise = 0.008;
  int splat_size = 16;
  int descriptor_dim = features::kDefaultDescriptorDim;
};

/// Scene presets matching each trajectory kind (landmark volume and defaults).
SequenceSpec default_sequence_spec(TrajectoryKind kind, int n_frames, std::uint64_t seed = 1);

struct SyntheticFeatures {
  features::FrameFeatures features;
  std::vector<int> landmark_ids;  // per keypoint
};

class SyntheticSequence {
 public:
  explicit SyntheticSequence(SequenceSpec spec);

  const SequenceSpec& spec() const { return spec_; }
  const SyntheticWorld& world() const { return world_; }
  const std::vector<geometry::SE3Pose>& poses() const { return poses_; }
  const geometry::CameraIntrinsics& camera() const { return spec_.camera; }
  int size() const { return static_cast<int>(poses_.size()); }
  double timestamp(int k) const { return k * spec_.frame_interval; }

  RenderedFrame render(int k) const;
  /// Keypoints at the true projections of visible, unoccluded landmarks (plus
  /// jitter) with noisy copies of the landmark descriptors.
  SyntheticFeatures features(int k) const;
  SyntheticFeatures features(int k, const RenderedFrame& rendered) const;

 private:
  SequenceSpec spec_;
  SyntheticWorld world_;
  std::vector<geometry::SE3Pose> poses_;
};

/// Writes images/NNNNNN.png, times.txt, calib.txt, groundtruth.txt (TUM),
/// poses.txt (KITTI) and features.dkkp into `dir`.
void export_sequence(const SyntheticSequence& seq, const std::filesystem::path& dir);

}  // namespace kpslam::sim
