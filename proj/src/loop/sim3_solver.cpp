#include "kpslam/loop/sim3_solver.h"

#include <cmath>
#include <random>
#include <set>

#include "kpslam/common/error.h"
#include "kpslam/geometry/alignment.h"
#include "kpslam/optim/solver.h"

namespace kpslam::loop {

using geometry::Sim3Transform;
using geometry::Vector2;
using geometry::Vector3;

namespace {

// Whitened reprojection residual of a camera-frame point; large when behind.
Vector2 residual(const geometry::CameraIntrinsics& K, const Vector3& p, const Vector2& px, double sigma) {
  if (p.z() <= 1e-9) return Vector2::Constant(1e3);
  return (px - geometry::project_unchecked(K, p)) / sigma;
}

optim::ResidualBlock forward_block(optim::ParamId s, const Vector3& x2, const Vector2& px1, double sigma1,
                                   const geometry::CameraIntrinsics& K, double huber) {
  optim::ResidualBlock b;
  b.dim = 2;
  b.params = {s};
  b.huber_delta = huber;
  b.fn = [=, &K](std::span<const double* const> p, Eigen::VectorXd& r, optim::Jacobians*) {
    r = residual(K, optim::ParameterStore::sim3_from_data(p[0]) * x2, px1, sigma1);
  };
  return b;
}

optim::ResidualBlock backward_block(optim::ParamId s, const Vector3& x1, const Vector2& px2, double sigma2,
                                    const geometry::CameraIntrinsics& K, double huber) {
  optim::ResidualBlock b;
  b.dim = 2;
  b.params = {s};
  b.huber_delta = huber;
  b.fn = [=, &K](std::span<const double* const> p, Eigen::VectorXd& r, optim::Jacobians*) {
    r = residual(K, optim::ParameterStore::sim3_from_data(p[0]).inverse() * x1, px2, sigma2);
  };
  return b;
}

Sim3Transform refine(const std::vector<Sim3Correspondence>& matches, const std::vector<bool>& use,
                     const Sim3Transform& init, const geometry::CameraIntrinsics& K, const Sim3Options& o) {
  optim::ParameterStore store;
  const optim::ParamId s = store.add_sim3(init);
  std::vector<optim::ResidualBlock> blocks;
  const double huber = std::sqrt(o.chi2_threshold);
  for (size_t i = 0; i < matches.size(); ++i) {
    if (!use[i]) continue;
    const Sim3Correspondence& m = matches[i];
    blocks.push_back(forward_block(s, m.x2, m.px1, m.sigma1, K, huber));
    blocks.push_back(backward_block(s, m.x1, m.px2, m.sigma2, K, huber));
  }
  optim::SolverOptions so;
  so.max_iterations = o.refine_iterations;
  optim::solve(blocks, store, so);
  return store.sim3(s);
}

int count(const std::vector<bool>& mask) { return static_cast<int>(std::count(mask.begin(), mask.end(), true)); }

double octave_sigma(const map::KeyFrame& kf, int idx) {
  const double s = kf.pyramid ? kf.pyramid->scale_factor() : 1.0;
  return std::pow(s, kf.keypoints[idx].octave);
}

}  // namespace

std::vector<bool> sim3_inliers(const std::vector<Sim3Correspondence>& matches, const Sim3Transform& S12,
                               const geometry::CameraIntrinsics& K, double chi2) {
  const Sim3Transform S21 = S12.inverse();
  std::vector<bool> mask(matches.size());
  for (size_t i = 0; i < matches.size(); ++i) {
    const Sim3Correspondence& m = matches[i];
    mask[i] = residual(K, S12 * m.x2, m.px1, m.sigma1).squaredNorm() <= chi2 &&
              residual(K, S21 * m.x1, m.px2, m.sigma2).squaredNorm() <= chi2;
  }
  return mask;
}

std::optional<Sim3Estimate> estimate_sim3(const std::vector<Sim3Correspondence>& matches,
                                          const geometry::CameraIntrinsics& K, const Sim3Options& options) {
  const int n = static_cast<int>(matches.size());
  if (n < 3) return std::nullopt;
  std::mt19937_64 rng(options.seed);
  std::optional<Sim3Transform> best;
  int best_count = 0;
  for (int it = 0; it < options.ransac_iterations; ++it) {
    int idx[3];
    idx[0] = static_cast<int>(rng() % n);
    do idx[1] = static_cast<int>(rng() % n);
    while (idx[1] == idx[0]);
    do idx[2] = static_cast<int>(rng() % n);
    while (idx[2] == idx[0] || idx[2] == idx[1]);
    std::vector<Vector3> est, gt;
    for (int k : idx) {
      est.push_back(matches[k].x2);
      gt.push_back(matches[k].x1);
    }
    Sim3Transform S;
    try {
      S = geometry::umeyama_align(est, gt, true);
    } catch (const Error&) {
      continue;
    }
    if (!S.translation().allFinite() || !std::isfinite(S.scale())) continue;
    const int c = count(sim3_inliers(matches, S, K, options.chi2_threshold));
    if (c > best_count) {
      best_count = c;
      best = S;
    }
  }
  if (!best || best_count < 3) return std::nullopt;

  Sim3Estimate out;
  std::vector<bool> mask = sim3_inliers(matches, *best, K, options.chi2_threshold);
  Sim3Transform S = *best;
  try {
    S = refine(matches, mask, S, K, options);
  } catch (const Error&) {
    return std::nullopt;
  }
  mask = sim3_inliers(matches, S, K, options.chi2_threshold);
  out.S12 = S;
  out.inliers = mask;
  out.n_inliers = count(mask);
  if (out.n_inliers < options.min_inliers) return std::nullopt;
  return out;
}

std::optional<LoopSim3> compute_sim3(const map::GlobalMap& map, map::KeyFrameId current, map::KeyFrameId loop,
                                     const std::vector<std::pair<int, int>>& keypoint_matches,
                                     const geometry::CameraIntrinsics& K, const Sim3Options& options) {
  const map::KeyFrame& kc = map.keyframe(current);
  const map::KeyFrame& km = map.keyframe(loop);
  std::vector<Sim3Correspondence> corr;
  std::vector<LoopMatch> pairs;
  std::set<map::MapPointId> used_c, used_m;
  for (const auto& [ic, im] : keypoint_matches) {
    const map::MapPointId pc = kc.map_point_links[ic];
    const map::MapPointId pm = km.map_point_links[im];
    if (pc == map::kNone || pm == map::kNone || !used_c.insert(pc).second || !used_m.insert(pm).second) continue;
    Sim3Correspondence c;
    c.x1 = kc.pose * map.point(pc).position;
    c.px1 = kc.keypoints[ic].position;
    c.sigma1 = octave_sigma(kc, ic);
    c.x2 = km.pose * map.point(pm).position;
    c.px2 = km.keypoints[im].position;
    c.sigma2 = octave_sigma(km, im);
    corr.push_back(c);
    pairs.push_back({ic, pm});
  }
  const std::optional<Sim3Estimate> est = estimate_sim3(corr, K, options);
  if (!est) return std::nullopt;

  LoopSim3 out;
  out.S_cm = est->S12;
  out.n_inliers = est->n_inliers;
  std::set<int> taken;
  std::set<map::MapPointId> matched;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!est->inliers[i]) continue;
    out.matches.push_back(pairs[i]);
    taken.insert(pairs[i].keypoint);
    matched.insert(pairs[i].point);
  }

  // guided pass over the loop neighbourhood
  const Sim3Transform S_cw = out.S_cm * Sim3Transform(km.pose);
  std::set<map::MapPointId> candidates;
  std::vector<map::KeyFrameId> region = map.covisible(loop);
  region.push_back(loop);
  for (map::KeyFrameId kf : region) {
    for (map::MapPointId pid : map.keyframe(kf).map_point_links) {
      if (pid != map::kNone && !matched.count(pid)) candidates.insert(pid);
    }
  }
  const double max_scale = kc.pyramid ? kc.pyramid->scale(kc.pyramid->n_levels() - 1) : 1.0;
  std::map<int, std::pair<int, map::MapPointId>> guided;  // keypoint -> (distance, point)
  for (map::MapPointId pid : candidates) {
    const map::MapPoint& p = map.point(pid);
    const Vector3 x = S_cw * p.position;
    if (x.z() <= 0.0) continue;
    const Vector2 uv = geometry::project_unchecked(K, x);
    if (!K.in_image(uv)) continue;
    int best = -1, best_dist = options.max_hamming + 1;
    for (int idx : kc.grid.query(kc.keypoints, uv, options.guided_radius * max_scale)) {
      if (taken.count(idx)) continue;
      if ((kc.keypoints[idx].position - uv).norm() > options.guided_radius * octave_sigma(kc, idx)) continue;
      const int h = features::hamming(p.descriptor, kc.descriptors[idx]);
      if (h < best_dist) {
        best_dist = h;
        best = idx;
      }
    }
    if (best < 0) continue;
    auto it = guided.find(best);
    if (it == guided.end() || best_dist < it->second.first) guided[best] = {best_dist, pid};
  }

  // re-refine over inliers (both views) and guided matches (current view only)
  optim::ParameterStore store;
  const optim::ParamId s = store.add_sim3(out.S_cm);
  std::vector<optim::ResidualBlock> blocks;
  const double huber = std::sqrt(options.chi2_threshold);
  for (size_t i = 0; i < corr.size(); ++i) {
    if (!est->inliers[i]) continue;
    blocks.push_back(forward_block(s, corr[i].x2, corr[i].px1, corr[i].sigma1, K, huber));
    blocks.push_back(backward_block(s, corr[i].x1, corr[i].px2, corr[i].sigma2, K, huber));
  }
  for (const auto& [idx, entry] : guided) {
    const Vector3 xm = km.pose * map.point(entry.second).position;
    blocks.push_back(forward_block(s, xm, kc.keypoints[idx].position, octave_sigma(kc, idx), K, huber));
  }
  if (!guided.empty()) {
    optim::SolverOptions so;
    so.max_iterations = options.refine_iterations;
    try {
      optim::solve(blocks, store, so);
      out.S_cm = store.sim3(s);
    } catch (const Error&) {
    }
  }
  out.S_cw = out.S_cm * Sim3Transform(km.pose);
  for (const auto& [idx, entry] : guided) {
    const Vector3 x = out.S_cw * map.point(entry.second).position;
    if (residual(K, x, kc.keypoints[idx].position, octave_sigma(kc, idx)).squaredNorm() <= options.chi2_threshold) {
      out.matches.push_back({idx, entry.second});
    }
  }
  return out;
}

}  // namespace kpslam::loop
