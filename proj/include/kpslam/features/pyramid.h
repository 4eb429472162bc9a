#pragma once

#include <vector>

#include "kpslam/features/image.h"

namespace kpslam::features {

/// Level sizes and scales of a pyramid, without the pixels.
struct PyramidLayout {
  double scale_factor = 2.0;
  std::vector<std::pair<int, int>> sizes;  // (width, height) per level

  int n_levels() const { return static_cast<int>(sizes.size()); }
  double scale(int level) const;

  /// Level-0 pixel coordinate <-> level-k coordinate (pixel centres aligned).
  Eigen::Vector2d to_level(const Eigen::Vector2d& p0, int level) const;
  Eigen::Vector2d from_level(const Eigen::Vector2d& pk, int level) const;

  static PyramidLayout make(int width, int height, int n_levels, double scale_factor);
};

class ImagePyramid {
 public:
  ImagePyramid() = default;
  ImagePyramid(std::vector<GrayImage> levels, PyramidLayout layout)
      : levels_(std::move(levels)), layout_(std::move(layout)) {}

  int n_levels() const { return static_cast<int>(levels_.size()); }
  const GrayImage& level(int k) const { return levels_.at(k); }
  double scale_factor() const { return layout_.scale_factor; }
  double scale(int k) const { return layout_.scale(k); }
  const PyramidLayout& layout() const { return layout_; }

 private:
  std::vector<GrayImage> levels_;
  PyramidLayout layout_;
};

/// One downsampling step: pixel (x, y) of the result samples the source at
/// ((x + 0.5) s - 0.5, (y + 0.5) s - 0.5).
GrayImage downsample(const GrayImage& src, int width, int height, double scale_factor);

/// Level k has size floor(size0 / scale_factor^k) and is resampled from level
/// k-1 by bilinear averaging. Throws kTooSmallImage when a level would be
/// smaller than 32x32, kInvalidArgument for n_levels < 1 or scale_factor <= 1.
ImagePyramid build_pyramid(const GrayImage& image, int n_levels, double scale_factor);

}  // namespace kpslam::features
