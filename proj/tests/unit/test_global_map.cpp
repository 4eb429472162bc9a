#include <gtest/gtest.h>

#include <sstream>

#include "kpslam/common/error.h"
#include "kpslam/map/global_map.h"
#include "kpslam/map/map_dump.h"

using namespace kpslam;
using namespace kpslam::map;

namespace {

// Keyframe with n keypoints; descriptor i has bit pattern derived from `salt + i`.
KeyFrame make_keyframe(int n, int salt = 0) {
  KeyFrame kf;
  for (int i = 0; i < n; ++i) {
    features::Keypoint kp;
    kp.position = {10.0 + i, 20.0};
    kf.keypoints.push_back(kp);
    features::BinaryDescriptor d(256);
    for (int b = 0; b < 256; ++b) d.set(b, ((salt + i) * 2654435761u >> (b % 32)) & 1u);
    kf.descriptors.push_back(d);
  }
  kf.map_point_links.assign(n, kNone);
  return kf;
}

// Brute-force count of points observed by both keyframes.
int brute_shared(const GlobalMap& m, KeyFrameId a, KeyFrameId b) {
  int n = 0;
  for (const auto& [id, p] : m.points()) n += p.observations.count(a) && p.observations.count(b);
  return n;
}

}  // namespace

TEST(GlobalMap, FirstKeyframeHasNoEdges) {
  GlobalMap m;
  const KeyFrameId id = m.add_keyframe(make_keyframe(30));
  EXPECT_EQ(id, 0);
  EXPECT_TRUE(m.keyframe(0).covisibility().empty());
  EXPECT_EQ(m.keyframe(0).parent, kNone);
}

TEST(GlobalMap, SharedPointsCreateEdgeAtThreshold) {
  for (int shared : {20, 15, 14}) {
    GlobalMap m;
    const KeyFrameId a = m.add_keyframe(make_keyframe(30));
    for (int i = 0; i < 30; ++i) m.add_observation(m.add_point({0, 0, 1.0 + i}), a, i);
    KeyFrame kf = make_keyframe(30);
    for (int i = 0; i < shared; ++i) kf.map_point_links[i] = m.keyframe(a).map_point_links[i];
    const KeyFrameId b = m.add_keyframe(kf);
    EXPECT_EQ(brute_shared(m, a, b), shared);
    EXPECT_EQ(m.shared_count(a, b), shared);
    EXPECT_EQ(m.shared_count(b, a), shared);
    const bool edge = shared >= kCovisibilityThreshold;
    EXPECT_EQ(m.keyframe(a).covisibility().count(b), edge ? 1u : 0u);
    EXPECT_EQ(m.keyframe(b).covisibility().count(a), edge ? 1u : 0u);
    if (edge) {
      EXPECT_EQ(m.keyframe(a).covisibility().at(b), shared);
    }
    EXPECT_EQ(m.keyframe(b).parent, a);
    EXPECT_TRUE(m.audit().empty());
  }
}

TEST(GlobalMap, EraseAndReplaceKeepIntegrity) {
  GlobalMap m;
  std::vector<KeyFrameId> kfs;
  for (int k = 0; k < 4; ++k) kfs.push_back(m.add_keyframe(make_keyframe(40, k)));
  std::vector<MapPointId> pts;
  for (int i = 0; i < 40; ++i) {
    const MapPointId p = m.add_point({0, 0, 1.0 + i});
    pts.push_back(p);
    for (int k = 0; k < 4; ++k) {
      if ((i + k) % 3 != 0) m.add_observation(p, kfs[k], i);
    }
    if (m.point(p).observations.empty()) m.add_observation(p, kfs[0], i);
  }
  ASSERT_TRUE(m.audit().empty());
  m.erase_point(pts[5]);
  EXPECT_FALSE(m.has_point(pts[5]));
  EXPECT_EQ(m.resolve(pts[5]), kNone);
  for (const auto& [id, kf] : m.keyframes()) {
    for (MapPointId link : kf.map_point_links) EXPECT_NE(link, pts[5]);
  }
  EXPECT_TRUE(m.audit().empty());

  // fuse a duplicate: a fresh point observed by keyframe 3 only, at a free keypoint
  KeyFrame extra = make_keyframe(2, 99);
  const KeyFrameId e = m.add_keyframe(extra);
  const MapPointId dup = m.add_point({0, 0, 50});
  m.add_observation(dup, e, 0);
  m.replace_point(dup, pts[7]);
  EXPECT_EQ(m.resolve(dup), pts[7]);
  EXPECT_EQ(m.point(pts[7]).observations.at(e), 0);
  EXPECT_TRUE(m.audit().empty());
  for (const auto& [a, ka] : m.keyframes()) {
    for (const auto& [b, kb] : m.keyframes()) {
      if (a != b) {
        EXPECT_EQ(m.shared_count(a, b), brute_shared(m, a, b));
      }
    }
  }
}

TEST(GlobalMap, AuditDetectsCorruption) {
  GlobalMap m;
  const KeyFrameId a = m.add_keyframe(make_keyframe(5));
  const MapPointId p = m.add_point({1, 2, 3});
  m.add_observation(p, a, 2);
  ASSERT_TRUE(m.audit().empty());
  GlobalMap broken = m;
  broken.keyframe(a).map_point_links[2] = kNone;
  EXPECT_FALSE(broken.audit().empty());
  GlobalMap broken2 = m;
  broken2.keyframe(a).shared_counts[7] = 3;
  EXPECT_FALSE(broken2.audit().empty());
}

TEST(GlobalMap, RepresentativeDescriptorMinimizesMedianDistance) {
  GlobalMap m;
  // three observations: two identical descriptors and one far away
  std::vector<KeyFrameId> kfs;
  for (int k = 0; k < 3; ++k) {
    KeyFrame kf = make_keyframe(1);
    kf.descriptors[0] = features::BinaryDescriptor(256);
    if (k == 2) {
      for (int b = 0; b < 100; ++b) kf.descriptors[0].set(b, true);
    } else {
      kf.descriptors[0].set(0, k == 1);
    }
    kfs.push_back(m.add_keyframe(kf));
  }
  const MapPointId p = m.add_point({0, 0, 1});
  for (KeyFrameId k : kfs) m.add_observation(p, k, 0);
  const auto& d = m.point(p).descriptor;
  EXPECT_LT(features::hamming(d, m.keyframe(kfs[0]).descriptors[0]), 2);
}

TEST(GlobalMap, CopyIsIndependentSnapshot) {
  GlobalMap m;
  const KeyFrameId a = m.add_keyframe(make_keyframe(3));
  m.add_observation(m.add_point({1, 1, 1}), a, 0);
  const GlobalMap snapshot = m;
  EXPECT_TRUE(snapshot == m);
  m.point(0).position.x() = 2.0;
  EXPECT_FALSE(snapshot == m);
}

TEST(MapDump, WritesKeyframesAndPoints) {
  GlobalMap m;
  KeyFrame kf = make_keyframe(2);
  kf.timestamp = 1.5;
  kf.pose = geometry::SE3Pose(Eigen::Quaterniond::Identity(), geometry::Vector3(-1, 0, 0));
  const KeyFrameId a = m.add_keyframe(kf);
  m.add_observation(m.add_point({1, 2, 3}), a, 1);
  std::ostringstream out;
  write_map_dump(out, m);
  const std::string s = out.str();
  EXPECT_NE(s.find("0 1.500000000 1 0 0 0 0 0 1\n"), std::string::npos) << s;
  EXPECT_NE(s.find("0 1 2 3 1\n"), std::string::npos) << s;
}
