#pragma once

#include <vector>

#include "kpslam/features/descriptor.h"
#include "kpslam/features/pyramid.h"

namespace kpslam::features {

struct GridSize {
  int rows = 6;
  int cols = 8;
};

/// Per-level quotas proportional to level pixel area, summing to budget
/// (largest-remainder rounding).
std::vector<int> level_quotas(int budget, const PyramidLayout& layout);

/// Returns indices into candidates of the kept keypoints, in descending score
/// order. Each level keeps the top ceil(quota / cells) candidates per grid
/// cell; unused budget is then filled with the best remaining candidates.
std::vector<int> select_keypoints(const std::vector<Keypoint>& candidates, int budget,
                                  GridSize grid, const PyramidLayout& layout);

std::vector<Keypoint> distribute_keypoints(const std::vector<Keypoint>& candidates, int budget,
                                           GridSize grid, const PyramidLayout& layout);

inline std::vector<Keypoint> distribute_keypoints(const std::vector<Keypoint>& candidates,
                                                  int budget, GridSize grid,
                                                  const ImagePyramid& pyramid) {
  return distribute_keypoints(candidates, budget, grid, pyramid.layout());
}

}  // namespace kpslam::features
