#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "../support/scenario.h"
#include "kpslam/common/error.h"
#include "kpslam/mapping/local_mapping.h"
#include "kpslam/sim/world.h"

using namespace kpslam;
using geometry::SE3Pose;
using geometry::Vector3;

namespace {

geometry::CameraIntrinsics camera() { return {380, 380, 319.5, 239.5, 640, 480}; }

sim::SyntheticWorld front_world(int n, double z_min = 4.0, double z_max = 7.0) {
  sim::WorldBounds b;
  b.volume.min = {-3.0, -2.2, z_min};
  b.volume.max = {3.0, 2.2, z_max};
  return sim::gen_world(5, n, b);
}

SE3Pose camera_at(const Vector3& center) { return SE3Pose(Eigen::Quaterniond::Identity(), -center); }

// Keyframes at the given poses; keypoints whose landmark passes `linked` are
// tied to a map point at the true position.
struct Scene {
  map::GlobalMap map;
  std::vector<scenario::SimFrame> frames;
  std::vector<map::KeyFrameId> kfs;
  std::map<int, map::MapPointId> point_of;
};

Scene build(const sim::SyntheticWorld& world, const std::vector<SE3Pose>& poses,
            const std::function<bool(int)>& linked) {
  Scene s;
  for (size_t k = 0; k < poses.size(); ++k) {
    scenario::SimFrame f = scenario::sim_frame(world, poses[k], camera(), k);
    f.frame.map_point_links.assign(f.frame.size(), map::kNone);
    for (size_t i = 0; i < f.frame.size(); ++i) {
      const int lm = f.landmark_ids[i];
      if (!linked(lm)) continue;
      if (!s.point_of.count(lm)) s.point_of[lm] = s.map.add_point(world.landmarks[lm].position);
      f.frame.map_point_links[i] = s.point_of[lm];
    }
    s.kfs.push_back(mapping::insert_keyframe(s.map, f.frame));
    s.frames.push_back(std::move(f));
  }
  return s;
}

int landmark_at(const Scene& s, map::KeyFrameId kf, int idx) {
  for (size_t k = 0; k < s.kfs.size(); ++k) {
    if (s.kfs[k] == kf) return s.frames[k].landmark_ids[idx];
  }
  return -1;
}

}  // namespace

TEST(LocalMapping, InsertKeyframeRegistersObservations) {
  const sim::SyntheticWorld world = front_world(300);
  Scene s = build(world, {camera_at({0, 0, 0}), camera_at({0.2, 0, 0})}, [](int) { return true; });
  EXPECT_TRUE(s.map.audit().empty());
  // brute-force recount of shared observations
  int shared = 0;
  for (const auto& [id, p] : s.map.points()) shared += p.observations.count(0) && p.observations.count(1);
  EXPECT_GT(shared, 15);
  EXPECT_EQ(s.map.shared_count(0, 1), shared);
  EXPECT_EQ(s.map.shared_count(1, 0), shared);
}

TEST(LocalMapping, NoiseFreePairTriangulatesTrueLandmarks) {
  const sim::SyntheticWorld world = front_world(400);
  Scene s = build(world, {camera_at({0, 0, 0}), camera_at({0.4, 0.05, 0})},
                  [](int lm) { return lm % 2 == 0; });
  const map::KeyFrameId b = s.kfs[1];
  // oracle: odd landmarks seen in both views with enough parallax
  std::set<int> in_a(s.frames[0].landmark_ids.begin(), s.frames[0].landmark_ids.end());
  int eligible = 0;
  for (int lm : s.frames[1].landmark_ids) {
    if (lm % 2 == 0 || !in_a.count(lm)) continue;
    const Vector3 X = world.landmarks[lm].position;
    const double cos_par = (X - s.frames[0].frame.pose.center()).normalized().dot(
        (X - s.frames[1].frame.pose.center()).normalized());
    eligible += std::acos(std::min(1.0, cos_par)) * 180.0 / M_PI >= 0.5 ? 1 : 0;
  }
  const std::set<map::MapPointId> before = [&] {
    std::set<map::MapPointId> ids;
    for (const auto& [id, p] : s.map.points()) ids.insert(id);
    return ids;
  }();
  const int created = mapping::create_map_points(s.map, b, camera());
  ASSERT_GT(eligible, 50);
  EXPECT_GE(created, 0.95 * eligible);
  int checked = 0;
  for (const auto& [id, p] : s.map.points()) {
    if (before.count(id)) continue;
    ASSERT_EQ(p.observations.size(), 2u);
    const int lm_a = landmark_at(s, p.observations.begin()->first, p.observations.begin()->second);
    const int lm_b = landmark_at(s, p.observations.rbegin()->first, p.observations.rbegin()->second);
    ASSERT_EQ(lm_a, lm_b);
    EXPECT_LT((p.position - world.landmarks[lm_a].position).norm(), 1e-3);
    ++checked;
  }
  EXPECT_EQ(checked, created);
  EXPECT_TRUE(s.map.audit().empty());
}

TEST(LocalMapping, NoNeighboursCreatesNothing) {
  const sim::SyntheticWorld world = front_world(300);
  Scene s = build(world, {camera_at({0, 0, 0})}, [](int lm) { return lm % 2 == 0; });
  EXPECT_EQ(mapping::create_map_points(s.map, s.kfs[0], camera()), 0);
}

TEST(LocalMapping, InsufficientParallaxCreatesNothing) {
  const sim::SyntheticWorld world = front_world(300);
  // 5 mm baseline at 4+ units depth: parallax well under half a degree
  Scene s = build(world, {camera_at({0, 0, 0}), camera_at({0.005, 0, 0})},
                  [](int lm) { return lm % 2 == 0; });
  mapping::LocalMappingOptions opts;
  opts.min_baseline_ratio = 0.0;  // let every pair reach the parallax test
  EXPECT_EQ(mapping::create_map_points(s.map, s.kfs[1], camera(), opts), 0);
}

TEST(LocalMapping, FusionMergesDuplicatePoints) {
  const sim::SyntheticWorld world = front_world(300);
  Scene s = build(world, {camera_at({0, 0, 0}), camera_at({0.3, 0, 0})}, [](int) { return true; });
  // duplicate every point observed only by the second keyframe's first 20 links
  int duplicated = 0;
  map::KeyFrame& kb = s.map.keyframe(s.kfs[1]);
  for (size_t i = 0; i < kb.size() && duplicated < 20; ++i) {
    const map::MapPointId pid = kb.map_point_links[i];
    if (pid == map::kNone || s.map.point(pid).observations.size() < 2) continue;
    s.map.erase_observation(pid, s.kfs[1]);
    const map::MapPointId dup = s.map.add_point(s.map.point(pid).position + Vector3(0.001, 0, 0));
    s.map.add_observation(dup, s.kfs[1], static_cast<int>(i));
    ++duplicated;
  }
  const size_t n_before = s.map.points().size();
  const int fused = mapping::fuse_with_neighbours(s.map, s.kfs[1], camera());
  EXPECT_GE(fused, duplicated);
  EXPECT_EQ(s.map.points().size(), n_before - duplicated);
  EXPECT_TRUE(s.map.audit().empty());
}

TEST(LocalMapping, CullingRules) {
  const sim::SyntheticWorld world = front_world(200);
  Scene s = build(world, {camera_at({0, 0, 0}), camera_at({0.2, 0, 0})}, [](int lm) { return lm % 5 != 0; });
  const map::KeyFrameId a = s.kfs[0];
  // single-observation point and a poorly found one, both fresh
  const map::MapPointId lonely = s.map.add_point({0, 0, 5});
  int free_idx = -1;
  for (size_t i = 0; i < s.map.keyframe(a).size(); ++i) {
    if (s.map.keyframe(a).map_point_links[i] == map::kNone) free_idx = static_cast<int>(i);
  }
  ASSERT_GE(free_idx, 0);
  s.map.add_observation(lonely, a, free_idx);
  map::MapPointId poor = map::kNone, fine = map::kNone;
  for (const auto& [id, p] : s.map.points()) {
    if (p.observations.size() < 2) continue;
    if (poor == map::kNone) {
      poor = id;
    } else if (fine == map::kNone) {
      fine = id;
    }
  }
  s.map.point(poor).visible = 10;
  s.map.point(poor).found = 1;
  s.map.point(fine).visible = 4;
  s.map.point(fine).found = 1;  // exactly at the threshold
  for (const auto& [id, p] : s.map.points()) s.map.point(id).created_at_keyframe_count = s.map.n_keyframes();

  EXPECT_EQ(mapping::cull_map_points(s.map), 0);  // grace period
  map::Frame blank = s.frames[0].frame;
  blank.map_point_links.assign(blank.size(), map::kNone);
  for (int k = 0; k < 3; ++k) {
    mapping::insert_keyframe(s.map, blank);
    if (k < 2) {
      EXPECT_EQ(mapping::cull_map_points(s.map), 0);
    }
  }
  const int removed = mapping::cull_map_points(s.map);
  EXPECT_GE(removed, 2);
  EXPECT_FALSE(s.map.has_point(lonely));
  EXPECT_FALSE(s.map.has_point(poor));
  EXPECT_TRUE(s.map.has_point(fine));
  for (const auto& [id, kf] : s.map.keyframes()) {
    for (map::MapPointId pid : kf.map_point_links) {
      EXPECT_NE(pid, lonely);
      EXPECT_NE(pid, poor);
    }
  }
  EXPECT_TRUE(s.map.audit().empty());
}

namespace {

std::vector<SE3Pose> strip(int n, double span) {
  std::vector<SE3Pose> poses;
  for (int k = 0; k < n; ++k) {
    const double x = -span / 2 + span * k / (n - 1);
    poses.push_back(camera_at({x, 0.1 * std::sin(k), 0.05 * k}));
  }
  return poses;
}

double mean_point_error(const Scene& s, const sim::SyntheticWorld& world) {
  double sum = 0.0;
  for (const auto& [lm, pid] : s.point_of) sum += (s.map.point(pid).position - world.landmarks[lm].position).norm();
  return sum / s.point_of.size();
}

}  // namespace

TEST(LocalBundleAdjust, NoiseFreeMapIsFixedPoint) {
  const sim::SyntheticWorld world = front_world(300);
  Scene s = build(world, strip(4, 0.8), [](int) { return true; });
  const map::GlobalMap before = s.map;
  const auto r = mapping::local_bundle_adjust(s.map, s.kfs.back(), camera());
  ASSERT_TRUE(r.has_value());
  EXPECT_LT(r->report.final_cost, 1e-12);
  EXPECT_EQ(r->removed_observations, 0);
  for (const auto& [id, kf] : s.map.keyframes()) {
    EXPECT_LT(geometry::rotation_distance_deg(kf.pose, before.keyframe(id).pose), 1e-6);
    EXPECT_LT(geometry::translation_distance(kf.pose, before.keyframe(id).pose), 1e-6);
  }
  for (const auto& [id, p] : s.map.points()) EXPECT_LT((p.position - before.point(id).position).norm(), 1e-6);
}

TEST(LocalBundleAdjust, NoisyObservationsAndPerturbedPointsConverge) {
  // close, wide strip: 0.5 px noise pins points to about a centimetre
  const sim::SyntheticWorld world = front_world(300, 2.5, 4.5);
  Scene s = build(world, strip(10, 3.0), [](int) { return true; });
  std::mt19937 rng(3);
  std::normal_distribution<double> px(0.0, 0.5), pt(0.0, 0.05);
  for (map::KeyFrameId id : s.kfs) {
    for (auto& kp : s.map.keyframe(id).keypoints) kp.position += geometry::Vector2(px(rng), px(rng));
  }
  for (const auto& [lm, pid] : s.point_of) s.map.point(pid).position += Vector3(pt(rng), pt(rng), pt(rng));
  const SE3Pose first = s.map.keyframe(s.kfs[0]).pose;
  const double err_before = mean_point_error(s, world);
  mapping::BundleAdjustOptions opts;
  opts.remove_outliers = false;
  const auto r = mapping::local_bundle_adjust(s.map, s.kfs.back(), camera(), opts);
  ASSERT_TRUE(r.has_value());
  const double err_after = mean_point_error(s, world);
  EXPECT_GE(err_before / err_after, 5.0) << err_before << " -> " << err_after;
  EXPECT_LE(r->report.final_cost, r->report.initial_cost);
  double prev = r->report.initial_cost;
  for (double c : r->report.accepted_costs) {
    EXPECT_LE(c, prev);
    prev = c;
  }
  // the first keyframe anchors the gauge
  EXPECT_EQ(geometry::translation_distance(s.map.keyframe(s.kfs[0]).pose, first), 0.0);
}

TEST(LocalBundleAdjust, SingleKeyframeIsSkipped) {
  const sim::SyntheticWorld world = front_world(200);
  Scene s = build(world, {camera_at({0, 0, 0})}, [](int) { return true; });
  EXPECT_FALSE(mapping::local_bundle_adjust(s.map, s.kfs[0], camera()).has_value());
}

TEST(LocalBundleAdjust, KeyframesOutsideTheNeighbourhoodAreAnchors) {
  const sim::SyntheticWorld world = front_world(300);
  Scene s = build(world, strip(5, 1.6), [](int) { return true; });
  map::GlobalMap before = s.map;
  std::set<map::KeyFrameId> free = {s.kfs[3], s.kfs[4]}, fixed = {s.kfs[0]};
  std::set<map::MapPointId> points;
  for (const auto& [id, p] : s.map.points()) points.insert(id);
  for (map::MapPointId pid : points) s.map.point(pid).position += Vector3(0.01, -0.01, 0.02);
  const auto r = mapping::bundle_adjust(s.map, free, fixed, points, camera());
  // every observer not in `free` is held
  EXPECT_EQ(r.n_free_keyframes, 2);
  EXPECT_EQ(r.n_fixed_keyframes, 3);
  for (int k : {0, 1, 2}) {
    EXPECT_EQ(geometry::translation_distance(s.map.keyframe(s.kfs[k]).pose, before.keyframe(s.kfs[k]).pose), 0.0);
  }
  EXPECT_THROW(mapping::bundle_adjust(s.map, {s.kfs[0]}, {}, {}, camera()), Error);
}
