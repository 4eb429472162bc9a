#pragma once

#include <cstdint>
#include <vector>

#include "kpslam/features/image.h"
#include "kpslam/geometry/camera.h"
#include "kpslam/sim/world.h"

namespace kpslam::sim {

struct RenderOptions {
  double noise_sigma = 0.0;     // per-pixel Gaussian intensity noise
  std::uint64_t noise_seed = 0;
  int splat_size = 16;          // splat side in pixels
  double near_plane = 0.1;
};

struct Correspondence {
  int landmark_id = 0;
  geometry::Vector2 pixel = geometry::Vector2::Zero();
  double depth = 0.0;
  bool occluded = false;  // centre pixel covered by a nearer splat
};

struct RenderedFrame {
  features::GrayImage image;
  std::vector<Correspondence> correspondences;  // ordered by landmark id
};

/// Mid-gray background with a low-amplitude texture that depends on the
/// viewing direction, plus far-to-near landmark splats.
RenderedFrame render_frame(const SyntheticWorld& world, const geometry::SE3Pose& pose,
                           const geometry::CameraIntrinsics& K, const RenderOptions& options = {});

/// Visible landmarks only: in front of the camera and projecting inside the image.
std::vector<Correspondence> visible_landmarks(const SyntheticWorld& world,
                                              const geometry::SE3Pose& pose,
                                              const geometry::CameraIntrinsics& K,
                                              double near_plane = 0.1);

}  // namespace kpslam::sim
