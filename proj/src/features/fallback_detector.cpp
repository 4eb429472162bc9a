#include "kpslam/features/fallback_detector.h"

#include <array>
#include <random>

namespace kpslam::features {

namespace {

constexpr int kPatchHalf = 8;
constexpr int kBorder = kPatchHalf + 2;
constexpr std::uint32_t kPatternSeed = 0x5eed1234u;
constexpr std::array<double, 5> kBinomial = {1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};

struct PixelPair {
  int x1, y1, x2, y2;
};

std::vector<PixelPair> make_pattern(int dim) {
  std::mt19937 rng(kPatternSeed);
  std::vector<PixelPair> pattern(dim);
  // offsets in [-8, 7]: raw engine output keeps the pattern identical on every platform
  auto offset = [&rng] { return static_cast<int>(rng() % 16) - kPatchHalf; };
  for (auto& p : pattern) {
    do {
      p = {offset(), offset(), offset(), offset()};
    } while (p.x1 == p.x2 && p.y1 == p.y2);
  }
  return pattern;
}

bool is_local_max(const GrayImage& r, int x, int y) {
  const double v = r.at(x, y);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const double n = r.at(x + dx, y + dy);
      // plateaus: the first pixel in raster order wins
      const bool earlier = dy < 0 || (dy == 0 && dx < 0);
      if (earlier ? n >= v : n > v) return false;
    }
  }
  return true;
}

}  // namespace

GrayImage harris_response(const GrayImage& image, double k) {
  const int w = image.width();
  const int h = image.height();
  GrayImage ixx(w, h), iyy(w, h), ixy(w, h);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      auto p = [&](int dx, int dy) { return static_cast<double>(image.at(x + dx, y + dy)); };
      const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1) - p(-1, -1) - 2 * p(-1, 0) - p(-1, 1)) / 8.0;
      const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1) - p(-1, -1) - 2 * p(0, -1) - p(1, -1)) / 8.0;
      ixx.at(x, y) = gx * gx;
      iyy.at(x, y) = gy * gy;
      ixy.at(x, y) = gx * gy;
    }
  }
  GrayImage response(w, h);
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      double a = 0, b = 0, c = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const double w = kBinomial[dx + 2] * kBinomial[dy + 2];
          a += w * ixx.at(x + dx, y + dy);
          b += w * iyy.at(x + dx, y + dy);
          c += w * ixy.at(x + dx, y + dy);
        }
      }
      const double trace = a + b;
      response.at(x, y) = a * b - c * c - k * trace * trace;
    }
  }
  return response;
}

FrameFeatures detect_fallback(const ImagePyramid& pyramid, int budget,
                              const FallbackOptions& options) {
  static const std::vector<PixelPair> default_pattern = make_pattern(kDefaultDescriptorDim);
  const std::vector<PixelPair> pattern = options.descriptor_dim == kDefaultDescriptorDim
                                             ? default_pattern
                                             : make_pattern(options.descriptor_dim);
  std::vector<Keypoint> candidates;
  std::vector<FloatDescriptor> descriptors;
  for (int level = 0; level < pyramid.n_levels(); ++level) {
    const GrayImage& img = pyramid.level(level);
    const GrayImage response = harris_response(img, options.harris_k);
    for (int y = kBorder; y < img.height() - kBorder; ++y) {
      for (int x = kBorder; x < img.width() - kBorder; ++x) {
        const double r = response.at(x, y);
        if (r < options.min_response || !is_local_max(response, x, y)) continue;
        FloatDescriptor d;
        d.values.resize(pattern.size());
        for (size_t i = 0; i < pattern.size(); ++i) {
          const PixelPair& p = pattern[i];
          d.values[i] = img.at(x + p.x1, y + p.y1) - img.at(x + p.x2, y + p.y2);
        }
        if (!(d.norm() > 0.0)) continue;
        d.normalize();
        Keypoint kp;
        kp.position = pyramid.layout().from_level(Eigen::Vector2d(x, y), level);
        kp.octave = level;
        kp.score = r;
        candidates.push_back(kp);
        descriptors.push_back(std::move(d));
      }
    }
  }
  FrameFeatures out;
  if (budget <= 0) return out;
  for (int idx : select_keypoints(candidates, budget, options.grid, pyramid.layout())) {
    out.keypoints.push_back(candidates[idx]);
    out.descriptors.push_back(descriptors[idx]);
  }
  return out;
}

}  // namespace kpslam::features
