#pragma once

#include <Eigen/Core>
#include <vector>

namespace kpslam::features {

/// Single-channel image (double precision), intensities nominally in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0)
      : width_(width), height_(height), pixels_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  double at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return pixels_[static_cast<size_t>(y) * width_ + x]; }
  const std::vector<double>& pixels() const { return pixels_; }
  std::vector<double>& pixels() { return pixels_; }

  /// Bilinear interpolation; coordinates are clamped to the image.
  double bilinear(double x, double y) const;

  /// Gradient of the bilinear interpolant at (x, y).
  Eigen::Vector2d bilinear_gradient(double x, double y) const;

  bool contains(double x, double y, double border = 0.0) const {
    return x >= border && y >= border && x <= width_ - 1 - border && y <= height_ - 1 - border;
  }

  bool operator==(const GrayImage& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

}  // namespace kpslam::features
