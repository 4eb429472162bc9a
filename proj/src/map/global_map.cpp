#include "kpslam/map/global_map.h"

#include <algorithm>
#include <limits>
#include <utility>

#include "kpslam/common/error.h"

namespace kpslam::map {

std::map<KeyFrameId, int> KeyFrame::covisibility(int min_shared) const {
  std::map<KeyFrameId, int> out;
  for (const auto& [id, n] : shared_counts) {
    if (n >= min_shared) out.emplace(id, n);
  }
  return out;
}

const KeyFrame& GlobalMap::keyframe(KeyFrameId id) const {
  auto it = keyframes_.find(id);
  if (it == keyframes_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "map: unknown keyframe " + std::to_string(id));
  }
  return it->second;
}

KeyFrame& GlobalMap::keyframe(KeyFrameId id) {
  return const_cast<KeyFrame&>(std::as_const(*this).keyframe(id));
}

const MapPoint& GlobalMap::point(MapPointId id) const {
  auto it = points_.find(id);
  if (it == points_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "map: unknown map point " + std::to_string(id));
  }
  return it->second;
}

MapPoint& GlobalMap::point(MapPointId id) {
  return const_cast<MapPoint&>(std::as_const(*this).point(id));
}

KeyFrameId GlobalMap::last_keyframe_id() const {
  return keyframes_.empty() ? kNone : keyframes_.rbegin()->first;
}

KeyFrameId GlobalMap::first_keyframe_id() const {
  return keyframes_.empty() ? kNone : keyframes_.begin()->first;
}

KeyFrameId GlobalMap::add_keyframe(KeyFrame kf) {
  if (kf.map_point_links.size() != kf.keypoints.size()) {
    throw Error(ErrorCode::kInvalidArgument, "map: keyframe links do not match keypoints");
  }
  const KeyFrameId id = next_keyframe_id_++;
  const KeyFrameId previous = last_keyframe_id();
  std::vector<MapPointId> links = std::move(kf.map_point_links);
  kf.kf_id = id;
  kf.map_point_links.assign(links.size(), kNone);
  kf.shared_counts.clear();
  kf.loop_edges.clear();
  kf.parent = kNone;
  keyframes_.emplace(id, std::move(kf));
  for (int i = 0; i < static_cast<int>(links.size()); ++i) {
    const MapPointId p = resolve(links[i]);
    if (p == kNone || point(p).observations.count(id)) continue;
    add_observation(p, id, i);
  }
  KeyFrame& stored = keyframes_.at(id);
  KeyFrameId best = previous;
  int best_count = 0;
  for (const auto& [other, n] : stored.shared_counts) {
    if (n > best_count) {
      best = other;
      best_count = n;
    }
  }
  stored.parent = best;
  return id;
}

MapPointId GlobalMap::add_point(const geometry::Vector3& position) {
  const MapPointId id = next_point_id_++;
  MapPoint p;
  p.id = id;
  p.position = position;
  p.created_at_keyframe_count = n_keyframes();
  points_.emplace(id, std::move(p));
  return id;
}

void GlobalMap::bump_shared(MapPointId point_id, KeyFrameId kf, int delta) {
  KeyFrame& k = keyframe(kf);
  for (const auto& [other, idx] : point(point_id).observations) {
    if (other == kf) continue;
    KeyFrame& o = keyframe(other);
    auto update = [delta](std::map<KeyFrameId, int>& counts, KeyFrameId key) {
      const int v = (counts[key] += delta);
      if (v <= 0) counts.erase(key);
    };
    update(k.shared_counts, other);
    update(o.shared_counts, kf);
  }
}

void GlobalMap::add_observation(MapPointId point_id, KeyFrameId kf, int keypoint_index) {
  MapPoint& p = point(point_id);
  KeyFrame& k = keyframe(kf);
  if (keypoint_index < 0 || keypoint_index >= static_cast<int>(k.keypoints.size())) {
    throw Error(ErrorCode::kInvalidArgument, "map: keypoint index out of range");
  }
  if (p.observations.count(kf)) {
    throw Error(ErrorCode::kInvalidArgument, "map: keyframe already observes the point");
  }
  const MapPointId previous = k.map_point_links[keypoint_index];
  if (previous != kNone) erase_observation(previous, kf);
  bump_shared(point_id, kf, +1);
  p.observations.emplace(kf, keypoint_index);
  k.map_point_links[keypoint_index] = point_id;
  update_descriptor(point_id);
}

void GlobalMap::erase_observation(MapPointId point_id, KeyFrameId kf) {
  MapPoint& p = point(point_id);
  auto it = p.observations.find(kf);
  if (it == p.observations.end()) return;
  KeyFrame& k = keyframe(kf);
  k.map_point_links[it->second] = kNone;
  p.observations.erase(it);
  bump_shared(point_id, kf, -1);
  if (p.observations.empty()) {
    points_.erase(point_id);
    replaced_[point_id] = kNone;
  } else {
    update_descriptor(point_id);
  }
}

void GlobalMap::erase_point(MapPointId point_id) {
  MapPoint& p = point(point_id);
  const std::vector<KeyFrameId> observers = [&] {
    std::vector<KeyFrameId> ids;
    for (const auto& [kf, idx] : p.observations) ids.push_back(kf);
    return ids;
  }();
  // drop links and shared counts one observation at a time
  for (KeyFrameId kf : observers) {
    if (!has_point(point_id)) break;
    erase_observation(point_id, kf);
  }
  points_.erase(point_id);
  replaced_[point_id] = kNone;
}

void GlobalMap::replace_point(MapPointId from, MapPointId to) {
  if (from == to) return;
  MapPoint& src = point(from);
  point(to);
  const std::map<KeyFrameId, int> obs = src.observations;
  const int visible = src.visible;
  const int found = src.found;
  for (const auto& [kf, idx] : obs) {
    erase_observation(from, kf);
    if (!point(to).observations.count(kf)) add_observation(to, kf, idx);
  }
  if (has_point(from)) points_.erase(from);
  replaced_[from] = to;
  MapPoint& dst = point(to);
  dst.visible += visible;
  dst.found += found;
}

MapPointId GlobalMap::resolve(MapPointId id) const {
  for (int hops = 0; id != kNone && hops < 1000; ++hops) {
    if (points_.count(id)) return id;
    auto it = replaced_.find(id);
    if (it == replaced_.end()) return kNone;
    id = it->second;
  }
  return kNone;
}

void GlobalMap::update_descriptor(MapPointId point_id) {
  MapPoint& p = point(point_id);
  std::vector<const features::BinaryDescriptor*> ds;
  for (const auto& [kf, idx] : p.observations) ds.push_back(&keyframe(kf).descriptors[idx]);
  if (ds.empty()) return;
  const size_t n = ds.size();
  size_t best = 0;
  int best_median = std::numeric_limits<int>::max();
  std::vector<int> dist(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) dist[j] = features::hamming(*ds[i], *ds[j]);
    std::vector<int> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    const int median = sorted[(n - 1) / 2];
    if (median < best_median) {
      best_median = median;
      best = i;
    }
  }
  p.descriptor = *ds[best];
}

int GlobalMap::shared_count(KeyFrameId a, KeyFrameId b) const {
  const auto& counts = keyframe(a).shared_counts;
  auto it = counts.find(b);
  return it == counts.end() ? 0 : it->second;
}

std::vector<KeyFrameId> GlobalMap::covisible(KeyFrameId kf, int min_shared) const {
  std::vector<std::pair<int, KeyFrameId>> ranked;
  for (const auto& [other, n] : keyframe(kf).shared_counts) {
    if (n >= min_shared) ranked.emplace_back(-n, other);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<KeyFrameId> out;
  for (const auto& [neg, id] : ranked) out.push_back(id);
  return out;
}

void GlobalMap::add_loop_edge(KeyFrameId a, KeyFrameId b) {
  keyframe(a).loop_edges.insert(b);
  keyframe(b).loop_edges.insert(a);
}

std::vector<std::string> GlobalMap::audit() const {
  std::vector<std::string> problems;
  auto report = [&problems](const std::string& s) { problems.push_back(s); };
  for (const auto& [pid, p] : points_) {
    if (p.observations.empty()) report("point " + std::to_string(pid) + " has no observations");
    for (const auto& [kf, idx] : p.observations) {
      auto it = keyframes_.find(kf);
      if (it == keyframes_.end()) {
        report("point " + std::to_string(pid) + " observed by missing keyframe " + std::to_string(kf));
        continue;
      }
      if (idx < 0 || idx >= static_cast<int>(it->second.map_point_links.size())) {
        report("point " + std::to_string(pid) + " has invalid keypoint index");
      } else if (it->second.map_point_links[idx] != pid) {
        report("keyframe " + std::to_string(kf) + " does not link back to point " + std::to_string(pid));
      }
    }
  }
  std::map<std::pair<KeyFrameId, KeyFrameId>, int> recount;
  for (const auto& [pid, p] : points_) {
    for (const auto& [a, ia] : p.observations) {
      for (const auto& [b, ib] : p.observations) {
        if (a != b) ++recount[{a, b}];
      }
    }
  }
  for (const auto& [kid, kf] : keyframes_) {
    if (kf.map_point_links.size() != kf.keypoints.size() || kf.descriptors.size() != kf.keypoints.size()) {
      report("keyframe " + std::to_string(kid) + " has inconsistent feature arrays");
    }
    for (int i = 0; i < static_cast<int>(kf.map_point_links.size()); ++i) {
      const MapPointId pid = kf.map_point_links[i];
      if (pid == kNone) continue;
      auto it = points_.find(pid);
      if (it == points_.end()) {
        report("keyframe " + std::to_string(kid) + " links missing point " + std::to_string(pid));
      } else {
        auto obs = it->second.observations.find(kid);
        if (obs == it->second.observations.end() || obs->second != i) {
          report("point " + std::to_string(pid) + " does not record observation by keyframe " +
                 std::to_string(kid));
        }
      }
    }
    for (const auto& [other, n] : kf.shared_counts) {
      const int truth = recount.count({kid, other}) ? recount.at({kid, other}) : 0;
      if (truth != n) {
        report("shared count " + std::to_string(kid) + "-" + std::to_string(other) + " is " +
               std::to_string(n) + ", recount " + std::to_string(truth));
      }
    }
    for (const auto& [key, n] : recount) {
      if (key.first == kid && !kf.shared_counts.count(key.second)) {
        report("missing shared count " + std::to_string(kid) + "-" + std::to_string(key.second));
      }
    }
    if (kf.parent != kNone && !keyframes_.count(kf.parent)) {
      report("keyframe " + std::to_string(kid) + " has missing parent");
    }
  }
  return problems;
}

bool GlobalMap::operator==(const GlobalMap& o) const {
  if (next_keyframe_id_ != o.next_keyframe_id_ || next_point_id_ != o.next_point_id_ ||
      replaced_ != o.replaced_ || keyframes_.size() != o.keyframes_.size() ||
      points_.size() != o.points_.size()) {
    return false;
  }
  for (auto a = keyframes_.begin(), b = o.keyframes_.begin(); a != keyframes_.end(); ++a, ++b) {
    const KeyFrame& x = a->second;
    const KeyFrame& y = b->second;
    if (a->first != b->first || x.pose.matrix() != y.pose.matrix() ||
        x.map_point_links != y.map_point_links || x.shared_counts != y.shared_counts ||
        x.word_counts != y.word_counts || x.bow != y.bow || x.parent != y.parent ||
        x.loop_edges != y.loop_edges) {
      return false;
    }
  }
  for (auto a = points_.begin(), b = o.points_.begin(); a != points_.end(); ++a, ++b) {
    const MapPoint& x = a->second;
    const MapPoint& y = b->second;
    if (a->first != b->first || x.position != y.position || x.observations != y.observations ||
        !(x.descriptor == y.descriptor) || x.visible != y.visible || x.found != y.found) {
      return false;
    }
  }
  return true;
}

}  // namespace kpslam::map
