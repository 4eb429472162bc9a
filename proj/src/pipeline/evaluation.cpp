#include "kpslam/pipeline/evaluation.h"

#include <algorithm>
#include <cmath>

#include "kpslam/common/error.h"
#include "kpslam/geometry/alignment.h"

namespace kpslam::pipeline {

using geometry::SE3Pose;
using geometry::Vector3;

std::vector<std::pair<int, int>> associate(const Trajectory& est, const Trajectory& gt, double max_dt) {
  std::vector<int> order(gt.size());
  for (size_t i = 0; i < gt.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gt[a].timestamp < gt[b].timestamp; });
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < est.size(); ++i) {
    const double t = est[i].timestamp;
    auto it = std::lower_bound(order.begin(), order.end(), t,
                               [&](int g, double v) { return gt[g].timestamp < v; });
    // nearest of the neighbours on either side; the earlier one wins ties
    int best = -1;
    double best_dt = max_dt;
    if (it != order.begin()) {
      const int g = *std::prev(it);
      if (t - gt[g].timestamp <= best_dt) {
        best = g;
        best_dt = t - gt[g].timestamp;
      }
    }
    if (it != order.end() && gt[*it].timestamp - t <= best_dt && (best < 0 || gt[*it].timestamp - t < best_dt)) {
      best = *it;
    }
    if (best >= 0) out.emplace_back(static_cast<int>(i), best);
  }
  return out;
}

SE3Pose transform_pose(const geometry::Sim3Transform& S, const SE3Pose& twc) {
  return SE3Pose(S.rotation() * twc.rotation(), S.apply(twc.translation()));
}

EvalResult eval_ate(const Trajectory& est, const Trajectory& gt, bool monocular_scale, double max_dt) {
  const auto pairs = associate(est, gt, max_dt);
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kTooFewPairs, "only " + std::to_string(pairs.size()) + " associated pose pairs");
  }
  std::vector<Vector3> a, b;
  for (const auto& [i, j] : pairs) {
    a.push_back(est[i].camera_to_world.translation());
    b.push_back(gt[j].camera_to_world.translation());
  }
  EvalResult r;
  r.n_pairs = static_cast<int>(pairs.size());
  r.alignment = geometry::umeyama_align(a, b, monocular_scale);
  double sum = 0.0;
  for (size_t k = 0; k < a.size(); ++k) sum += (b[k] - r.alignment.apply(a[k])).squaredNorm();
  r.ate_rmse = std::sqrt(sum / a.size());
  return r;
}

RelOptions synthetic_rel_options() {
  RelOptions o;
  o.lengths = {1, 2, 3, 4, 5, 6, 7, 8};
  o.per_length = 1.0;
  return o;
}

EvalResult eval_rel(const Trajectory& est, const Trajectory& gt, const RelOptions& options) {
  if (options.lengths.empty()) throw Error(ErrorCode::kInvalidArgument, "no sub-lengths");
  const auto pairs = associate(est, gt, options.max_dt);
  if (pairs.size() < 2) {
    throw Error(ErrorCode::kTooFewPairs, "only " + std::to_string(pairs.size()) + " associated pose pairs");
  }
  EvalResult r;
  r.n_pairs = static_cast<int>(pairs.size());
  if (options.alignment != RelAlignment::kNone) {
    r.alignment = eval_ate(est, gt, options.alignment == RelAlignment::kSimilarity, options.max_dt).alignment;
  }
  std::vector<SE3Pose> E, G;
  std::vector<double> dist{0.0};
  for (const auto& [i, j] : pairs) {
    E.push_back(transform_pose(r.alignment, est[i].camera_to_world));
    G.push_back(gt[j].camera_to_world);
    if (G.size() > 1) {
      dist.push_back(dist.back() + (G.back().translation() - G[G.size() - 2].translation()).norm());
    }
  }
  const double shortest = *std::min_element(options.lengths.begin(), options.lengths.end());
  if (dist.back() < shortest) {
    throw Error(ErrorCode::kTooShortSequence, "path length " + std::to_string(dist.back()) +
                                                  " is below the shortest sub-length " + std::to_string(shortest));
  }
  double t_sum = 0.0, r_sum = 0.0;
  const int n = static_cast<int>(G.size());
  for (int first = 0; first < n; ++first) {
    for (double len : options.lengths) {
      const auto it = std::upper_bound(dist.begin() + first, dist.end(), dist[first] + len);
      if (it == dist.end()) continue;
      const int last = static_cast<int>(it - dist.begin());
      const SE3Pose gt_rel = G[first].inverse() * G[last];
      const SE3Pose est_rel = E[first].inverse() * E[last];
      const SE3Pose err = gt_rel.inverse() * est_rel;
      t_sum += err.translation().norm() / len;
      r_sum += err.angle() / len;
      ++r.n_segments;
    }
  }
  if (r.n_segments == 0) throw Error(ErrorCode::kTooShortSequence, "no complete sub-length segment");
  r.t_rel = 100.0 * t_sum / r.n_segments;
  r.r_rel = r_sum / r.n_segments * 180.0 / M_PI * options.per_length;
  return r;
}

}  // namespace kpslam::pipeline
