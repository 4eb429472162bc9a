#include "kpslam/mapping/local_mapping.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kpslam/common/error.h"
#include "kpslam/geometry/triangulation.h"

namespace kpslam::mapping {

using geometry::Matrix3;
using geometry::SE3Pose;
using geometry::Vector2;
using geometry::Vector3;

namespace {

double sigma_of(const map::KeyFrame& kf, int idx) {
  const double s = kf.pyramid ? kf.pyramid->scale_factor() : 1.0;
  return std::pow(s, kf.keypoints[idx].octave);
}

std::vector<map::KeyFrameId> neighbours(const map::GlobalMap& map, map::KeyFrameId kf, int max_count) {
  std::vector<map::KeyFrameId> out = map.covisible(kf);
  if (static_cast<int>(out.size()) > max_count) out.resize(max_count);
  return out;
}

double median_depth(const map::GlobalMap& map, const map::KeyFrame& kf) {
  std::vector<double> z;
  for (map::MapPointId pid : kf.map_point_links) {
    if (pid != map::kNone && map.has_point(pid)) z.push_back((kf.pose * map.point(pid).position).z());
  }
  if (z.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::nth_element(z.begin(), z.begin() + z.size() / 2, z.end());
  return z[z.size() / 2];
}

// Fundamental matrix taking pixels of `a` to epipolar lines in `b`.
Matrix3 fundamental(const SE3Pose& a, const SE3Pose& b, const geometry::CameraIntrinsics& K) {
  const SE3Pose T_ba = b * a.inverse();
  const Matrix3 E = geometry::skew(T_ba.translation()) * T_ba.rotation_matrix();
  Matrix3 Kinv = Matrix3::Identity();
  Kinv(0, 0) = 1.0 / K.fx;
  Kinv(1, 1) = 1.0 / K.fy;
  Kinv(0, 2) = -K.cx / K.fx;
  Kinv(1, 2) = -K.cy / K.fy;
  return Kinv.transpose() * E * Kinv;
}

bool reprojects(const map::KeyFrame& kf, int idx, const Vector3& X, const geometry::CameraIntrinsics& K,
                double chi2) {
  const Vector3 p = kf.pose * X;
  if (p.z() <= 0.0) return false;
  const double s = sigma_of(kf, idx);
  return (kf.keypoints[idx].position - geometry::project_unchecked(K, p)).squaredNorm() / (s * s) <= chi2;
}

int triangulate_pair(map::GlobalMap& map, map::KeyFrameId a_id, map::KeyFrameId b_id,
                     const geometry::CameraIntrinsics& K, const LocalMappingOptions& opts) {
  const map::KeyFrame& a = map.keyframe(a_id);
  const map::KeyFrame& b = map.keyframe(b_id);
  const double baseline = (a.pose.center() - b.pose.center()).norm();
  const double depth = median_depth(map, b);
  if (!(baseline > 0.0) || (std::isfinite(depth) && baseline / depth < opts.min_baseline_ratio)) return 0;

  const Matrix3 F = fundamental(a.pose, b.pose, K);
  std::vector<int> free_b;
  for (int j = 0; j < static_cast<int>(b.size()); ++j) {
    if (b.map_point_links[j] == map::kNone) free_b.push_back(j);
  }
  // best candidate in b for each free keypoint of a; conflicts keep the lower distance
  std::vector<int> best_for_b(b.size(), -1), best_dist_b(b.size(), std::numeric_limits<int>::max());
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    if (a.map_point_links[i] != map::kNone) continue;
    const Vector3 line = F * a.keypoints[i].position.homogeneous();
    const double inv_norm = 1.0 / std::hypot(line.x(), line.y());
    if (!std::isfinite(inv_norm)) continue;
    int best = -1, best_dist = opts.max_hamming + 1;
    for (int j : free_b) {
      const double d = std::abs(line.dot(b.keypoints[j].position.homogeneous())) * inv_norm;
      if (d > opts.epipolar_threshold * sigma_of(b, j)) continue;
      const int h = features::hamming(a.descriptors[i], b.descriptors[j]);
      if (h < best_dist) {
        best_dist = h;
        best = j;
      }
    }
    if (best >= 0 && best_dist < best_dist_b[best]) {
      best_dist_b[best] = best_dist;
      best_for_b[best] = i;
    }
  }

  geometry::TriangulationOptions tri;
  tri.min_parallax_deg = opts.min_parallax_deg;
  int created = 0;
  for (int j = 0; j < static_cast<int>(b.size()); ++j) {
    const int i = best_for_b[j];
    if (i < 0) continue;
    const map::KeyFrame& ka = map.keyframe(a_id);
    const map::KeyFrame& kb = map.keyframe(b_id);
    if (ka.map_point_links[i] != map::kNone || kb.map_point_links[j] != map::kNone) continue;
    Vector3 X;
    try {
      X = geometry::triangulate(ka.pose, kb.pose, K, ka.keypoints[i].position, kb.keypoints[j].position, tri)
              .position;
    } catch (const Error&) {
      continue;
    }
    if (!X.allFinite() || !reprojects(ka, i, X, K, opts.chi2_threshold) ||
        !reprojects(kb, j, X, K, opts.chi2_threshold)) {
      continue;
    }
    const map::MapPointId pid = map.add_point(X);
    map.add_observation(pid, a_id, i);
    map.add_observation(pid, b_id, j);
    ++created;
  }
  return created;
}

}  // namespace

map::KeyFrameId insert_keyframe(map::GlobalMap& map, const map::Frame& frame) {
  map::KeyFrame kf;
  static_cast<map::Frame&>(kf) = frame;
  return map.add_keyframe(std::move(kf));
}

int create_map_points(map::GlobalMap& map, map::KeyFrameId kf, const geometry::CameraIntrinsics& K,
                      const LocalMappingOptions& options) {
  int created = 0;
  for (map::KeyFrameId n : neighbours(map, kf, options.max_neighbours)) {
    created += triangulate_pair(map, kf, n, K, options);
  }
  return created;
}

int fuse_points(map::GlobalMap& map, map::KeyFrameId target, const std::vector<map::MapPointId>& points,
                const geometry::CameraIntrinsics& K, const LocalMappingOptions& options) {
  int fused = 0;
  for (map::MapPointId raw : points) {
    const map::MapPointId pid = map.resolve(raw);
    if (pid == map::kNone || map.point(pid).observations.count(target)) continue;
    const map::KeyFrame& kf = map.keyframe(target);
    const map::MapPoint& p = map.point(pid);
    const Vector3 pc = kf.pose * p.position;
    if (pc.z() <= 0.0) continue;
    const Vector2 uv = geometry::project_unchecked(K, pc);
    if (!K.in_image(uv)) continue;
    const double max_scale = kf.pyramid ? kf.pyramid->scale(kf.pyramid->n_levels() - 1) : 1.0;
    int best = -1, best_dist = options.max_hamming + 1;
    for (int idx : kf.grid.query(kf.keypoints, uv, options.fuse_radius * max_scale)) {
      const double s = sigma_of(kf, idx);
      if ((kf.keypoints[idx].position - uv).norm() > options.fuse_radius * s) continue;
      if ((kf.keypoints[idx].position - uv).squaredNorm() / (s * s) > options.chi2_threshold) continue;
      const int h = features::hamming(p.descriptor, kf.descriptors[idx]);
      if (h < best_dist) {
        best_dist = h;
        best = idx;
      }
    }
    if (best < 0) continue;
    const map::MapPointId existing = kf.map_point_links[best];
    if (existing == map::kNone) {
      map.add_observation(pid, target, best);
    } else if (existing != pid) {
      const bool keep_existing =
          map.point(existing).observations.size() >= map.point(pid).observations.size();
      if (keep_existing) {
        map.replace_point(pid, existing);
      } else {
        map.replace_point(existing, pid);
      }
    } else {
      continue;
    }
    ++fused;
  }
  return fused;
}

int fuse_with_neighbours(map::GlobalMap& map, map::KeyFrameId kf, const geometry::CameraIntrinsics& K,
                         const LocalMappingOptions& options) {
  const std::vector<map::KeyFrameId> ns = neighbours(map, kf, options.max_neighbours);
  auto linked = [&](map::KeyFrameId id) {
    std::vector<map::MapPointId> out;
    for (map::MapPointId pid : map.keyframe(id).map_point_links) {
      if (pid != map::kNone) out.push_back(pid);
    }
    return out;
  };
  int fused = 0;
  std::vector<map::MapPointId> from_neighbours;
  for (map::KeyFrameId n : ns) {
    for (map::MapPointId pid : linked(n)) from_neighbours.push_back(pid);
  }
  std::sort(from_neighbours.begin(), from_neighbours.end());
  from_neighbours.erase(std::unique(from_neighbours.begin(), from_neighbours.end()), from_neighbours.end());
  fused += fuse_points(map, kf, from_neighbours, K, options);
  const std::vector<map::MapPointId> own = linked(kf);
  for (map::KeyFrameId n : ns) {
    if (map.has_keyframe(n)) fused += fuse_points(map, n, own, K, options);
  }
  return fused;
}

int cull_map_points(map::GlobalMap& map, const LocalMappingOptions& options) {
  std::vector<map::MapPointId> doomed;
  for (const auto& [id, p] : map.points()) {
    if (p.created_at_keyframe_count + options.grace_keyframes > map.n_keyframes()) continue;
    if (p.found_ratio() < options.min_found_ratio ||
        static_cast<int>(p.observations.size()) < options.min_observations) {
      doomed.push_back(id);
    }
  }
  for (map::MapPointId id : doomed) map.erase_point(id);
  return static_cast<int>(doomed.size());
}

LocalMappingReport process_keyframe(map::GlobalMap& map, const map::Frame& frame,
                                    const geometry::CameraIntrinsics& K, const LocalMappingOptions& options) {
  LocalMappingReport report;
  report.keyframe = insert_keyframe(map, frame);
  report.created = create_map_points(map, report.keyframe, K, options);
  report.fused = fuse_with_neighbours(map, report.keyframe, K, options);
  if (options.run_bundle_adjustment) {
    try {
      report.ba = local_bundle_adjust(map, report.keyframe, K, options.ba);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kIllPosedProblem) throw;
    }
  }
  report.culled = cull_map_points(map, options);
  return report;
}

}  // namespace kpslam::mapping
