#include <gtest/gtest.h>

#include <random>

#include "kpslam/common/error.h"
#include "kpslam/geometry/camera.h"

using namespace kpslam;
using namespace kpslam::geometry;

namespace {

CameraIntrinsics small_camera() { return {100, 100, 50, 50, 100, 100}; }
CameraIntrinsics vga_camera() { return {380, 375, 320, 240, 640, 480}; }

}  // namespace

TEST(Camera, ProjectOpticalAxis) {
  EXPECT_LT((project(small_camera(), Vector3(0, 0, 1)) - Vector2(50, 50)).norm(), 1e-15);
}

TEST(Camera, ProjectHandEvaluated) {
  EXPECT_LT((project(small_camera(), Vector3(1, 0, 2)) - Vector2(100, 50)).norm(), 1e-15);
}

TEST(Camera, ProjectBehindCamera) {
  try {
    project(small_camera(), Vector3(0, 0, -1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBehindCamera);
  }
  EXPECT_THROW(project(small_camera(), Vector3(0, 0, 0)), Error);
}

TEST(Camera, LandmarkMustBeInCameraFrame) {
  EXPECT_THROW(project(small_camera(), Landmark3D{Vector3(0, 0, 1), CoordinateFrame::kWorld}), Error);
  EXPECT_NO_THROW(project(small_camera(), Landmark3D{Vector3(0, 0, 1), CoordinateFrame::kCamera}));
}

TEST(Camera, ValidateRejectsBadIntrinsics) {
  EXPECT_NO_THROW(vga_camera().validate());
  CameraIntrinsics k = vga_camera();
  k.fx = 0;
  EXPECT_THROW(k.validate(), Error);
  k = vga_camera();
  k.cx = 640;
  EXPECT_THROW(k.validate(), Error);
}

TEST(Camera, ProjectUnprojectRoundTrip) {
  const CameraIntrinsics k = vga_camera();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(0, 639), uy(0, 479), ud(0.1, 100);
  for (int i = 0; i < 1000; ++i) {
    const Vector2 px(ux(rng), uy(rng));
    const Vector3 p = unproject(k, px, ud(rng));
    EXPECT_LT((project(k, p) - px).norm(), 1e-9);
  }
}

TEST(Camera, PoseJacobianMatchesFiniteDifferences) {
  const CameraIntrinsics k = vga_camera();
  std::mt19937 rng(12);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Vector6 v;
    for (int i = 0; i < 6; ++i) v[i] = 0.3 * n(rng);
    const SE3Pose t = se3_exp(v);
    const Vector3 p_cam(n(rng), n(rng), 3.0 + std::abs(n(rng)));
    const Vector3 p_world = t.inverse().apply(p_cam);
    const Matrix26 analytic = projection_pose_jacobian(k, p_cam);
    Matrix26 numeric;
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      Vector6 d = Vector6::Zero();
      d[i] = h;
      const Vector2 plus = project(k, (se3_exp(d) * t).apply(p_world));
      const Vector2 minus = project(k, (se3_exp(-d) * t).apply(p_world));
      numeric.col(i) = (plus - minus) / (2 * h);
    }
    EXPECT_LT((analytic - numeric).norm() / analytic.norm(), 1e-4);
  }
}

TEST(Camera, PointJacobianMatchesFiniteDifferences) {
  const CameraIntrinsics k = vga_camera();
  const Vector3 p(0.4, -0.7, 2.5);
  const Matrix23 analytic = projection_jacobian(k, p);
  Matrix23 numeric;
  for (int i = 0; i < 3; ++i) {
    Vector3 d = Vector3::Zero();
    d[i] = 1e-6;
    numeric.col(i) = (project(k, p + d) - project(k, p - d)) / 2e-6;
  }
  EXPECT_LT((analytic - numeric).norm() / analytic.norm(), 1e-4);
}
