#include "kpslam/map/frame.h"

#include <algorithm>
#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::map {

KeypointGrid::KeypointGrid(const std::vector<features::Keypoint>& keypoints, int width,
                           int height, double cell_size)
    : cell_size_(cell_size),
      cols_(std::max(1, static_cast<int>(std::ceil(width / cell_size)))),
      rows_(std::max(1, static_cast<int>(std::ceil(height / cell_size)))),
      cells_(static_cast<size_t>(cols_) * rows_) {
  for (int i = 0; i < static_cast<int>(keypoints.size()); ++i) {
    const auto& p = keypoints[i].position;
    const int cx = std::clamp(static_cast<int>(p.x() / cell_size_), 0, cols_ - 1);
    const int cy = std::clamp(static_cast<int>(p.y() / cell_size_), 0, rows_ - 1);
    cells_[cy * cols_ + cx].push_back(i);
  }
}

std::vector<int> KeypointGrid::query(const std::vector<features::Keypoint>& keypoints,
                                     const Eigen::Vector2d& center, double radius,
                                     int min_octave, int max_octave) const {
  std::vector<int> out;
  if (cells_.empty()) return out;
  const int x0 = std::max(0, static_cast<int>(std::floor((center.x() - radius) / cell_size_)));
  const int x1 = std::min(cols_ - 1, static_cast<int>(std::floor((center.x() + radius) / cell_size_)));
  const int y0 = std::max(0, static_cast<int>(std::floor((center.y() - radius) / cell_size_)));
  const int y1 = std::min(rows_ - 1, static_cast<int>(std::floor((center.y() + radius) / cell_size_)));
  const double r2 = radius * radius;
  for (int cy = y0; cy <= y1; ++cy) {
    for (int cx = x0; cx <= x1; ++cx) {
      for (int i : cells_[cy * cols_ + cx]) {
        const features::Keypoint& kp = keypoints[i];
        if (kp.octave < min_octave || kp.octave > max_octave) continue;
        if ((kp.position - center).squaredNorm() <= r2) out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Frame::n_linked() const {
  return static_cast<int>(std::count_if(map_point_links.begin(), map_point_links.end(),
                                        [](MapPointId id) { return id != kNone; }));
}

Frame make_frame(std::uint64_t id, double timestamp,
                 std::shared_ptr<const features::ImagePyramid> pyramid,
                 const features::FrameFeatures& features, int width, int height) {
  if (features.keypoints.size() != features.descriptors.size()) {
    throw Error(ErrorCode::kInvalidArgument, "make_frame: keypoint/descriptor count mismatch");
  }
  Frame f;
  f.id = id;
  f.timestamp = timestamp;
  f.pyramid = std::move(pyramid);
  const int n_levels = f.pyramid ? f.pyramid->n_levels() : 1;
  for (size_t i = 0; i < features.keypoints.size(); ++i) {
    const features::Keypoint& kp = features.keypoints[i];
    const auto& p = kp.position;
    if (!(p.x() >= 0 && p.y() >= 0 && p.x() <= width - 1 && p.y() <= height - 1)) continue;
    features::Keypoint k = kp;
    k.octave = std::clamp(k.octave, 0, n_levels - 1);
    f.keypoints.push_back(k);
    f.float_descriptors.push_back(features.descriptors[i]);
    f.descriptors.push_back(features::binarize(features.descriptors[i]));
  }
  f.map_point_links.assign(f.keypoints.size(), kNone);
  f.grid = KeypointGrid(f.keypoints, width, height);
  return f;
}

}  // namespace kpslam::map
