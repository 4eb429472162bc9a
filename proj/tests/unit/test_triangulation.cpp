#include <gtest/gtest.h>

#include <random>

#include "kpslam/common/error.h"
#include "kpslam/geometry/triangulation.h"

using namespace kpslam;
using namespace kpslam::geometry;

namespace {

CameraIntrinsics camera() { return {380, 380, 320, 240, 640, 480}; }

SE3Pose look_from(const Vector3& center, double yaw) {
  const Matrix3 r_wc = Eigen::AngleAxisd(yaw, Vector3::UnitY()).toRotationMatrix();
  const Matrix3 r_cw = r_wc.transpose();
  return SE3Pose(r_cw, -r_cw * center);
}

}  // namespace

TEST(Triangulation, RecoversLandmarkFromExactProjections) {
  const CameraIntrinsics k = camera();
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5), z(4, 10);
  const SE3Pose a = look_from(Vector3(0, 0, 0), 0.0);
  const SE3Pose b = look_from(Vector3(0.6, 0.05, 0.1), -0.05);
  for (int i = 0; i < 200; ++i) {
    const Vector3 x(u(rng), u(rng), z(rng));
    const Vector2 pa = project(k, a.apply(x));
    const Vector2 pb = project(k, b.apply(x));
    const Landmark3D l = triangulate(a, b, k, pa, pb);
    EXPECT_EQ(l.frame, CoordinateFrame::kWorld);
    EXPECT_LT((l.position - x).norm(), 1e-6);
  }
}

TEST(Triangulation, NoisyObservationsReprojectClosely) {
  const CameraIntrinsics k = camera();
  std::mt19937 rng(22);
  std::normal_distribution<double> noise(0, 0.5);
  const SE3Pose a = look_from(Vector3(0, 0, 0), 0.0);
  const SE3Pose b = look_from(Vector3(1.0, 0, 0), 0.0);
  for (int i = 0; i < 50; ++i) {
    const Vector3 x(0.2 * i / 50.0 - 0.1, 0.3, 6.0);
    const Vector2 pa = project(k, a.apply(x)) + Vector2(noise(rng), noise(rng));
    const Vector2 pb = project(k, b.apply(x)) + Vector2(noise(rng), noise(rng));
    const Vector3 p = triangulate(a, b, k, pa, pb).position;
    EXPECT_LT((project(k, a.apply(p)) - pa).norm(), 2.0);
    EXPECT_LT((project(k, b.apply(p)) - pb).norm(), 2.0);
  }
}

TEST(Triangulation, IdenticalPosesAreDegenerate) {
  const SE3Pose a = look_from(Vector3(1, 2, 3), 0.2);
  try {
    triangulate(a, a, camera(), Vector2(300, 200), Vector2(310, 200));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateBaseline);
  }
}

TEST(Triangulation, ParallelRaysAreIllConditioned) {
  const SE3Pose a = look_from(Vector3(0, 0, 0), 0.0);
  const SE3Pose b = look_from(Vector3(1, 0, 0), 0.0);
  try {
    triangulate(a, b, camera(), Vector2(320, 240), Vector2(320, 240));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllConditioned);
  }
}

TEST(Triangulation, ParallaxHelper) {
  const SE3Pose a = look_from(Vector3(0, 0, 0), 0.0);
  const SE3Pose b = look_from(Vector3(2, 0, 0), 0.0);
  // point at (1, 0, 1): rays at +-45 degrees
  const Vector3 x(1, 0, 1);
  const double parallax = ray_parallax_deg(a, b, camera(), project(camera(), a.apply(x)),
                                           project(camera(), b.apply(x)));
  EXPECT_NEAR(parallax, 90.0, 1e-9);
}
