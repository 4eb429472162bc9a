#include "kpslam/tracking/projection_matcher.h"

#include <map>

namespace kpslam::tracking {

ProjectionResult match_by_projection(const map::Frame& reference, const map::Frame& current,
                                     const geometry::SE3Pose& pose_init, double radius,
                                     const map::GlobalMap& map, const geometry::CameraIntrinsics& K,
                                     int max_hamming) {
  ProjectionResult out;
  // keypoint -> best claim so far; map point -> claimed keypoint
  std::map<int, ProjectionMatch> by_keypoint;
  std::map<map::MapPointId, bool> seen;
  for (size_t i = 0; i < reference.size(); ++i) {
    const map::MapPointId id = map.resolve(reference.map_point_links[i]);
    if (id == map::kNone || seen.count(id)) continue;
    seen[id] = true;
    const geometry::Vector3 p = pose_init * map.point(id).position;
    if (p.z() <= 1e-6) continue;
    const geometry::Vector2 u = geometry::project_unchecked(K, p);
    if (!K.in_image(u)) continue;
    out.projected_points.push_back(id);

    const int octave = reference.keypoints[i].octave;
    int best = max_hamming + 1;
    int best_kp = -1;
    for (int j : current.grid.query(current.keypoints, u, radius, octave - 1, octave + 1)) {
      const int d = features::hamming(reference.descriptors[i], current.descriptors[j]);
      if (d < best) {
        best = d;
        best_kp = j;
      }
    }
    if (best_kp < 0) continue;
    auto it = by_keypoint.find(best_kp);
    if (it == by_keypoint.end() || best < it->second.distance) {
      by_keypoint[best_kp] = {id, best_kp, best};
    }
  }
  std::map<map::MapPointId, ProjectionMatch> by_point;
  for (const auto& [kp, m] : by_keypoint) by_point[m.point] = m;
  for (const auto& [id, m] : by_point) out.matches.push_back(m);
  return out;
}

}  // namespace kpslam::tracking
