#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kpslam/map/frame.h"

namespace kpslam::map {

inline constexpr int kCovisibilityThreshold = 15;

/// Sparse tf-idf word histogram, L1-normalized.
using BowVector = std::map<int, double>;

struct KeyFrame : Frame {
  KeyFrameId kf_id = kNone;
  std::map<KeyFrameId, int> shared_counts;  // every keyframe sharing >= 1 point
  std::map<int, int> word_counts;           // vocabulary node -> term count
  BowVector bow;
  KeyFrameId parent = kNone;
  std::set<KeyFrameId> loop_edges;

  /// Covisibility edges: neighbours sharing at least `min_shared` points.
  std::map<KeyFrameId, int> covisibility(int min_shared = kCovisibilityThreshold) const;
};

struct MapPoint {
  MapPointId id = kNone;
  geometry::Vector3 position = geometry::Vector3::Zero();
  std::map<KeyFrameId, int> observations;  // keyframe -> keypoint index
  features::BinaryDescriptor descriptor;
  int visible = 1;
  int found = 1;
  int created_at_keyframe_count = 0;  // map keyframe count when created

  double found_ratio() const { return visible > 0 ? static_cast<double>(found) / visible : 0.0; }
};

/// Keyframes, map points and the observation graph between them. A plain
/// value type: copying it takes a consistent snapshot.
class GlobalMap {
 public:
  const std::map<KeyFrameId, KeyFrame>& keyframes() const { return keyframes_; }
  const std::map<MapPointId, MapPoint>& points() const { return points_; }

  bool has_keyframe(KeyFrameId id) const { return keyframes_.count(id) > 0; }
  bool has_point(MapPointId id) const { return points_.count(id) > 0; }
  const KeyFrame& keyframe(KeyFrameId id) const;
  KeyFrame& keyframe(KeyFrameId id);
  const MapPoint& point(MapPointId id) const;
  MapPoint& point(MapPointId id);

  int n_keyframes() const { return static_cast<int>(keyframes_.size()); }
  KeyFrameId next_keyframe_id() const { return next_keyframe_id_; }
  KeyFrameId last_keyframe_id() const;
  KeyFrameId first_keyframe_id() const;

  /// Stores the keyframe under the next id and returns it. Existing links in
  /// kf.map_point_links are registered as observations; the spanning-tree
  /// parent becomes the keyframe sharing most points (else the previous one).
  KeyFrameId add_keyframe(KeyFrame kf);

  MapPointId add_point(const geometry::Vector3& position);
  void add_observation(MapPointId point, KeyFrameId kf, int keypoint_index);
  void erase_observation(MapPointId point, KeyFrameId kf);
  /// Removes the point and every keyframe link to it.
  void erase_point(MapPointId point);
  /// Moves the observations of `from` onto `to` and erases `from`.
  void replace_point(MapPointId from, MapPointId to);

  /// Follows replacements; kNone if the point was erased.
  MapPointId resolve(MapPointId id) const;

  /// Representative descriptor: the observation descriptor with minimum
  /// median Hamming distance to the others.
  void update_descriptor(MapPointId point);

  int shared_count(KeyFrameId a, KeyFrameId b) const;
  /// Covisible neighbours ordered by decreasing weight, ties by id.
  std::vector<KeyFrameId> covisible(KeyFrameId kf, int min_shared = kCovisibilityThreshold) const;

  void add_loop_edge(KeyFrameId a, KeyFrameId b);

  /// Full referential-integrity and covisibility recount. Returns problems found.
  std::vector<std::string> audit() const;

  bool operator==(const GlobalMap& other) const;

 private:
  void bump_shared(MapPointId point, KeyFrameId kf, int delta);

  std::map<KeyFrameId, KeyFrame> keyframes_;
  std::map<MapPointId, MapPoint> points_;
  std::map<MapPointId, MapPointId> replaced_;
  KeyFrameId next_keyframe_id_ = 0;
  MapPointId next_point_id_ = 0;
};

}  // namespace kpslam::map
