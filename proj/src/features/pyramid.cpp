#include "kpslam/features/pyramid.h"

#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::features {

namespace {
constexpr int kMinLevelSize = 32;
}

double PyramidLayout::scale(int level) const { return std::pow(scale_factor, level); }

Eigen::Vector2d PyramidLayout::to_level(const Eigen::Vector2d& p0, int level) const {
  const double s = scale(level);
  return (p0.array() + 0.5) / s - 0.5;
}

Eigen::Vector2d PyramidLayout::from_level(const Eigen::Vector2d& pk, int level) const {
  const double s = scale(level);
  return (pk.array() + 0.5) * s - 0.5;
}

PyramidLayout PyramidLayout::make(int width, int height, int n_levels, double scale_factor) {
  if (n_levels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "pyramid: n_levels must be >= 1");
  }
  if (!(scale_factor > 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pyramid: scale_factor must be > 1");
  }
  PyramidLayout layout;
  layout.scale_factor = scale_factor;
  for (int k = 0; k < n_levels; ++k) {
    const double s = std::pow(scale_factor, k);
    const int w = static_cast<int>(std::floor(width / s + 1e-9));
    const int h = static_cast<int>(std::floor(height / s + 1e-9));
    if (w < kMinLevelSize || h < kMinLevelSize) {
      throw Error(ErrorCode::kTooSmallImage, "pyramid: level " + std::to_string(k) +
                                                 " would be smaller than 32x32");
    }
    layout.sizes.emplace_back(w, h);
  }
  return layout;
}

GrayImage downsample(const GrayImage& src, int width, int height, double scale_factor) {
  GrayImage dst(width, height);
  for (int y = 0; y < height; ++y) {
    const double sy = (y + 0.5) * scale_factor - 0.5;
    for (int x = 0; x < width; ++x) {
      const double sx = (x + 0.5) * scale_factor - 0.5;
      dst.at(x, y) = src.bilinear(sx, sy);
    }
  }
  return dst;
}

ImagePyramid build_pyramid(const GrayImage& image, int n_levels, double scale_factor) {
  PyramidLayout layout = PyramidLayout::make(image.width(), image.height(), n_levels, scale_factor);
  std::vector<GrayImage> levels;
  levels.reserve(n_levels);
  levels.push_back(image);
  for (int k = 1; k < n_levels; ++k) {
    const auto [w, h] = layout.sizes[k];
    levels.push_back(downsample(levels.back(), w, h, scale_factor));
  }
  return ImagePyramid(std::move(levels), std::move(layout));
}

}  // namespace kpslam::features
