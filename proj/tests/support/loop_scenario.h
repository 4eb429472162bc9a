#pragma once

// A square-loop keyframe map built without tracking: keyframe poses are the
// (optionally drifted) trajectory, points are placed in the drifted world from
// the keyframe that first saw them, and a landmark keeps its point only while
// it stays in view, so the revisit creates duplicates as a real run would.

#include <map>
#include <vector>

#include "kpslam/geometry/alignment.h"
#include "kpslam/map/global_map.h"
#include "kpslam/sim/dataset.h"

namespace kpslam::scenario {

struct LoopScene {
  sim::SyntheticSequence seq;
  map::GlobalMap map;
  std::vector<map::KeyFrameId> kfs;
  std::vector<geometry::SE3Pose> truth;          // per keyframe
  std::vector<std::vector<int>> landmark_ids;    // per keyframe, per keypoint
  int first_revisit = 0;                         // first keyframe past one full lap
};

inline sim::SequenceSpec loop_spec(int n_keyframes, double laps, std::uint64_t seed = 1) {
  sim::SequenceSpec spec = sim::default_sequence_spec(sim::TrajectoryKind::kSquareLoop, n_keyframes, seed);
  spec.trajectory.laps = laps;
  return spec;
}

inline LoopScene build_loop_scene(int n_keyframes = 60, double laps = 1.25, double drift = 0.0,
                                  std::uint64_t seed = 1, int track_window = 3) {
  LoopScene s{sim::SyntheticSequence(loop_spec(n_keyframes, laps, seed)), {}, {}, {}, {}, 0};
  s.truth = s.seq.poses();
  const std::vector<geometry::SE3Pose> poses = sim::perturb_odometry(s.truth, drift, seed + 17);
  std::map<int, map::MapPointId> track;  // landmark -> live point
  std::map<int, int> last_seen;          // landmark -> keyframe index
  for (int k = 0; k < n_keyframes; ++k) {
    const sim::SyntheticFeatures f = s.seq.features(k);
    map::Frame frame = map::make_frame(static_cast<std::uint64_t>(k), s.seq.timestamp(k), nullptr, f.features,
                                       s.seq.camera().width, s.seq.camera().height);
    frame.pose = poses[k];
    frame.map_point_links.assign(frame.size(), map::kNone);
    for (size_t i = 0; i < frame.size(); ++i) {
      const int lm = f.landmark_ids[i];
      auto seen = last_seen.find(lm);
      if (seen == last_seen.end() || seen->second < k - track_window || !s.map.has_point(track[lm])) {
        const geometry::Vector3 p_cam = s.truth[k] * s.seq.world().landmarks[lm].position;
        track[lm] = s.map.add_point(poses[k].inverse() * p_cam);
      }
      frame.map_point_links[i] = track[lm];
      last_seen[lm] = k;
    }
    map::KeyFrame kf;
    static_cast<map::Frame&>(kf) = frame;
    s.kfs.push_back(s.map.add_keyframe(std::move(kf)));
    s.landmark_ids.push_back(f.landmark_ids);
  }
  for (const auto& [id, p] : s.map.points()) s.map.update_descriptor(id);
  s.first_revisit = 0;
  while (s.first_revisit < n_keyframes && laps * s.first_revisit / (n_keyframes - 1) <= 1.0) ++s.first_revisit;
  return s;
}

/// RMS camera-centre error after a similarity alignment to the truth.
inline double keyframe_ate(const map::GlobalMap& m, const std::vector<map::KeyFrameId>& kfs,
                           const std::vector<geometry::SE3Pose>& truth) {
  std::vector<geometry::Vector3> est, gt;
  for (size_t k = 0; k < kfs.size(); ++k) {
    est.push_back(m.keyframe(kfs[k]).pose.center());
    gt.push_back(truth[k].center());
  }
  const geometry::Sim3Transform S = geometry::umeyama_align(est, gt, true);
  double sum = 0.0;
  for (size_t k = 0; k < est.size(); ++k) sum += (S * est[k] - gt[k]).squaredNorm();
  return std::sqrt(sum / est.size());
}

}  // namespace kpslam::scenario
