#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kpslam/map/frame.h"
#include "kpslam/pipeline/config.h"
#include "kpslam/sim/dataset.h"

namespace kpslam::pipeline {

/// Where frames come from: an image directory or a synthetic spec, with
/// timestamps, intrinsics and an optional keypoint sidecar.
struct SequenceSource {
  std::vector<std::filesystem::path> images;      // empty for synthetic sources
  std::optional<sim::SequenceSpec> synthetic;
  std::vector<double> timestamps;
  geometry::CameraIntrinsics camera;
  std::optional<std::filesystem::path> sidecar;
  std::optional<std::filesystem::path> ground_truth;  // TUM or KITTI file, for evaluation only

  int size() const { return static_cast<int>(timestamps.size()); }
  /// Throws kInvalidArgument when counts disagree or intrinsics are missing.
  void validate() const;
};

/// Reads `dir`: images from images/ or image_0/ (sorted by name), times.txt,
/// and calib.txt holding either `fx fy cx cy width height` or a KITTI
/// `P0:` projection row. groundtruth.txt or poses.txt is recorded if present.
SequenceSource image_source(const std::filesystem::path& dir,
                            const std::optional<std::filesystem::path>& sidecar = std::nullopt);

SequenceSource synthetic_source(const sim::SequenceSpec& spec);

/// Synthetic spec from key=value text. `kind` (default circle) selects the
/// scene preset, then n_frames, seed, radius, laps, squareness, speed,
/// yaw_amplitude_deg, yaw_period, n_landmarks, frame_interval,
/// intensity_noise, keypoint_jitter, descriptor_noise, splat_size,
/// descriptor_dim, fx, fy, cx, cy, width and height override it.
sim::SequenceSpec parse_sequence_spec(const std::string& text, const std::string& origin = "spec");
/// A spec file, or a preset written as `kind` or `kind:n_frames`.
sim::SequenceSpec sequence_spec_from_argument(const std::string& argument);
std::string sequence_spec_to_text(const sim::SequenceSpec& spec);

struct InputFrame {
  std::uint64_t id = 0;
  double timestamp = 0.0;
  features::GrayImage image;
  features::FrameFeatures features;
};

/// Produces frames of a source in order. The sidecar is parsed when the
/// reader is opened, so a malformed file fails before frame 0. Frames absent
/// from the sidecar have no keypoints; without a sidecar the fallback
/// detector runs (synthetic sources use their true projections instead).
class FrameReader {
 public:
  FrameReader(const SequenceSource& source, const FeatureConfig& features);

  int size() const { return source_.size(); }
  InputFrame read(int k) const;
  /// Pyramid and binarized frame ready for tracking.
  map::Frame make_frame(const InputFrame& input) const;

  const sim::SyntheticSequence* synthetic() const { return synthetic_.get(); }

 private:
  SequenceSource source_;
  FeatureConfig features_;
  std::optional<features::SidecarFile> sidecar_;
  std::unique_ptr<sim::SyntheticSequence> synthetic_;
};

features::GrayImage load_gray_image(const std::filesystem::path& path);

}  // namespace kpslam::pipeline
