#include "kpslam/loop/loop_detector.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kpslam::loop {

const char* verdict_name(LoopVerdict v) {
  switch (v) {
    case LoopVerdict::kPending: return "pending";
    case LoopVerdict::kRejected: return "rejected";
    case LoopVerdict::kAccepted: return "accepted";
  }
  return "unknown";
}

std::optional<std::pair<map::KeyFrameId, double>> best_loop_candidate(const map::GlobalMap& map,
                                                                      const Vocabulary& vocab, map::KeyFrameId kf,
                                                                      int recent_exclusion) {
  const auto ranked = vocab.query(kf, loop_exclusions(map, kf, recent_exclusion));
  for (const auto& [id, score] : ranked) {
    if (map.has_keyframe(id)) return std::make_pair(id, score);
  }
  return std::nullopt;
}

std::vector<std::pair<int, int>> verified_matches(const map::GlobalMap& map, map::KeyFrameId a, map::KeyFrameId b,
                                                  const geometry::CameraIntrinsics& K, int max_hamming,
                                                  const GmsOptions& gms) {
  const map::KeyFrame& ka = map.keyframe(a);
  const map::KeyFrame& kb = map.keyframe(b);
  const auto raw = mutual_nearest_matches(ka.descriptors, kb.descriptors, max_hamming);
  std::vector<Eigen::Vector2d> pa, pb;
  for (const auto& kp : ka.keypoints) pa.push_back(kp.position);
  for (const auto& kp : kb.keypoints) pb.push_back(kp.position);
  const ImageSize size{K.width, K.height};
  std::vector<std::pair<int, int>> out;
  for (int idx : gms_filter(pa, pb, raw, size, size, gms)) out.push_back(raw[idx]);
  return out;
}

std::optional<LoopCandidate> LoopDetector::detect(const map::GlobalMap& map, const Vocabulary& vocab,
                                                  map::KeyFrameId kf, const geometry::CameraIntrinsics& K) {
  const auto best = best_loop_candidate(map, vocab, kf, options_.recent_exclusion);
  if (!best || best->second < options_.min_score) {
    groups_.clear();
    return std::nullopt;
  }
  LoopCandidate c;
  c.current = kf;
  c.candidate = best->first;
  c.score = best->second;

  std::set<map::KeyFrameId> region = {c.candidate};
  for (map::KeyFrameId n : map.covisible(c.candidate)) region.insert(n);
  int count = 1;
  for (const Group& g : groups_) {
    for (map::KeyFrameId id : region) {
      if (g.region.count(id)) {
        count = std::max(count, g.count + 1);
        break;
      }
    }
  }
  groups_ = {Group{region, count}};
  c.consistency = count;
  if (count < options_.consistency) {
    c.verdict = LoopVerdict::kPending;
    c.reason = "awaiting consistency";
    return c;
  }

  c.matches = verified_matches(map, kf, c.candidate, K, options_.max_hamming, options_.gms);
  if (c.n_gms() < options_.min_matches) {
    c.verdict = LoopVerdict::kRejected;
    c.reason = "too few verified matches";
    return c;
  }
  c.sim3 = compute_sim3(map, kf, c.candidate, c.matches, K, options_.sim3);
  if (!c.sim3) {
    c.verdict = LoopVerdict::kRejected;
    c.reason = "similarity not found";
    return c;
  }
  c.verdict = LoopVerdict::kAccepted;
  groups_.clear();
  return c;
}

std::string loop_log_line(const LoopCandidate& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d %d %.6f %d %d %s", c.current, c.candidate, c.score, c.n_gms(), c.n_inliers(),
                verdict_name(c.verdict));
  return buf;
}

}  // namespace kpslam::loop
