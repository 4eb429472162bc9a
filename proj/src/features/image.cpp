#include "kpslam/features/image.h"

#include <algorithm>
#include <cmath>

namespace kpslam::features {

namespace {

struct Cell {
  int x0, y0, x1, y1;
  double fx, fy;
};

Cell locate(double x, double y, int w, int h) {
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  x0 = std::min(x0, std::max(w - 2, 0));
  y0 = std::min(y0, std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  return {x0, y0, x1, y1, x - x0, y - y0};
}

}  // namespace

double GrayImage::bilinear(double x, double y) const {
  const Cell c = locate(x, y, width_, height_);
  const double i00 = at(c.x0, c.y0);
  const double i10 = at(c.x1, c.y0);
  const double i01 = at(c.x0, c.y1);
  const double i11 = at(c.x1, c.y1);
  return (1.0 - c.fy) * ((1.0 - c.fx) * i00 + c.fx * i10) + c.fy * ((1.0 - c.fx) * i01 + c.fx * i11);
}

Eigen::Vector2d GrayImage::bilinear_gradient(double x, double y) const {
  const Cell c = locate(x, y, width_, height_);
  const double i00 = at(c.x0, c.y0);
  const double i10 = at(c.x1, c.y0);
  const double i01 = at(c.x0, c.y1);
  const double i11 = at(c.x1, c.y1);
  return {(1.0 - c.fy) * (i10 - i00) + c.fy * (i11 - i01),
          (1.0 - c.fx) * (i01 - i00) + c.fx * (i11 - i10)};
}

}  // namespace kpslam::features
