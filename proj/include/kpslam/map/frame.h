#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kpslam/features/descriptor.h"
#include "kpslam/features/pyramid.h"
#include "kpslam/features/sidecar.h"
#include "kpslam/geometry/camera.h"

namespace kpslam::map {

using KeyFrameId = int;
using MapPointId = int;
inline constexpr int kNone = -1;

/// Bucketed keypoint positions for radius queries.
class KeypointGrid {
 public:
  KeypointGrid() = default;
  KeypointGrid(const std::vector<features::Keypoint>& keypoints, int width, int height,
               double cell_size = 16.0);

  /// Indices of keypoints within `radius` of `center` whose octave is in [min_octave, max_octave].
  std::vector<int> query(const std::vector<features::Keypoint>& keypoints,
                         const Eigen::Vector2d& center, double radius, int min_octave = 0,
                         int max_octave = 1 << 20) const;

 private:
  double cell_size_ = 16.0;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<std::vector<int>> cells_;
};

struct Frame {
  std::uint64_t id = 0;
  double timestamp = 0.0;
  std::shared_ptr<const features::ImagePyramid> pyramid;
  std::vector<features::Keypoint> keypoints;
  std::vector<features::FloatDescriptor> float_descriptors;
  std::vector<features::BinaryDescriptor> descriptors;
  geometry::SE3Pose pose;  // world to camera
  std::vector<MapPointId> map_point_links;
  KeypointGrid grid;

  size_t size() const { return keypoints.size(); }
  int n_linked() const;
};

/// Binarizes descriptors and builds the search grid. Keypoints outside the
/// image are dropped.
Frame make_frame(std::uint64_t id, double timestamp,
                 std::shared_ptr<const features::ImagePyramid> pyramid,
                 const features::FrameFeatures& features, int width, int height);

}  // namespace kpslam::map
