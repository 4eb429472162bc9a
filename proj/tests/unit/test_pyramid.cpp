#include <gtest/gtest.h>

#include <random>

#include "kpslam/common/error.h"
#include "kpslam/features/pyramid.h"

using namespace kpslam;
using namespace kpslam::features;

namespace {

GrayImage random_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0, 255);
  GrayImage img(w, h);
  for (double& p : img.pixels()) p = u(rng);
  return img;
}

}  // namespace

TEST(Pyramid, SingleLevelIsInput) {
  const GrayImage img = random_image(100, 80, 1);
  const ImagePyramid p = build_pyramid(img, 1, 1.2);
  ASSERT_EQ(p.n_levels(), 1);
  EXPECT_EQ(p.level(0), img);
}

TEST(Pyramid, LevelSizes) {
  const ImagePyramid p = build_pyramid(GrayImage(640, 480, 10.0f), 3, 2.0);
  ASSERT_EQ(p.n_levels(), 3);
  EXPECT_EQ(p.level(0).width(), 640);
  EXPECT_EQ(p.level(1).width(), 320);
  EXPECT_EQ(p.level(1).height(), 240);
  EXPECT_EQ(p.level(2).width(), 160);
  EXPECT_EQ(p.level(2).height(), 120);
  const ImagePyramid q = build_pyramid(GrayImage(640, 480), 4, 1.2);
  EXPECT_EQ(q.level(3).width(), 370);  // floor(640 / 1.728)
  EXPECT_EQ(q.level(3).height(), 277);
}

TEST(Pyramid, ConstantImageStaysConstant) {
  const ImagePyramid p = build_pyramid(GrayImage(200, 150, 77.0f), 3, 1.5);
  for (int k = 0; k < p.n_levels(); ++k) {
    for (double v : p.level(k).pixels()) EXPECT_DOUBLE_EQ(v, 77.0);
  }
}

TEST(Pyramid, ScaleTwoIsTwoByTwoBoxAverage) {
  const GrayImage img = random_image(64, 64, 2);
  const ImagePyramid p = build_pyramid(img, 2, 2.0);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const double avg = (img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) + img.at(2 * x, 2 * y + 1) +
                          img.at(2 * x + 1, 2 * y + 1)) / 4.0;
      EXPECT_NEAR(p.level(1).at(x, y), avg, 1e-3);
    }
  }
}

TEST(Pyramid, TooSmallImage) {
  try {
    build_pyramid(GrayImage(100, 100), 3, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooSmallImage);
  }
  EXPECT_THROW(build_pyramid(GrayImage(20, 20), 1, 2.0), Error);
}

TEST(Pyramid, InvalidArguments) {
  EXPECT_THROW(build_pyramid(GrayImage(64, 64), 0, 2.0), Error);
  EXPECT_THROW(build_pyramid(GrayImage(64, 64), 2, 1.0), Error);
}

TEST(Pyramid, LevelCoordinateMapping) {
  const PyramidLayout layout = PyramidLayout::make(640, 480, 3, 2.0);
  const Eigen::Vector2d p0(100.0, 37.5);
  EXPECT_LT((layout.from_level(layout.to_level(p0, 2), 2) - p0).norm(), 1e-12);
  EXPECT_LT((layout.to_level(Eigen::Vector2d(0.5, 0.5), 1) - Eigen::Vector2d(0, 0)).norm(), 1e-12);
}

TEST(Image, BilinearAndGradient) {
  GrayImage img(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) img.at(x, y) = 2 * x + 3 * y + x * y;
  }
  // f = 2x + 3y + xy is bilinear, so interpolation is exact
  const double x = 1.3, y = 2.6;
  EXPECT_NEAR(img.bilinear(x, y), 2 * x + 3 * y + x * y, 1e-5);
  const Eigen::Vector2d g = img.bilinear_gradient(x, y);
  EXPECT_NEAR(g.x(), 2 + y, 1e-5);
  EXPECT_NEAR(g.y(), 3 + x, 1e-5);
  EXPECT_NEAR(img.bilinear(-5, -5), 0.0, 1e-6);
}
