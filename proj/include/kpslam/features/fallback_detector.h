#pragma once

#include "kpslam/features/distribution.h"
#include "kpslam/features/sidecar.h"

namespace kpslam::features {

struct FallbackOptions {
  int descriptor_dim = kDefaultDescriptorDim;
  GridSize grid;
  double harris_k = 0.04;
  double min_response = 1e4;  // intensity^4 units
};

/// Harris corners per pyramid level, balanced by distribute_keypoints, with
/// signed pixel-pair difference descriptors over a 16x16 patch.
FrameFeatures detect_fallback(const ImagePyramid& pyramid, int budget,
                              const FallbackOptions& options = {});

/// Harris response map of one image (zero near the border).
GrayImage harris_response(const GrayImage& image, double k);

}  // namespace kpslam::features
