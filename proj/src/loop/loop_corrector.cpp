#include "kpslam/loop/loop_corrector.h"

#include <algorithm>

#include "kpslam/common/error.h"

namespace kpslam::loop {

using geometry::Sim3Transform;

std::vector<EssentialEdge> essential_graph_edges(const map::GlobalMap& map,
                                                 const std::map<map::KeyFrameId, Sim3Transform>& poses,
                                                 int min_covisibility) {
  std::set<std::pair<map::KeyFrameId, map::KeyFrameId>> seen;
  std::vector<EssentialEdge> edges;
  auto add = [&](map::KeyFrameId a, map::KeyFrameId b) {
    if (a == b || !poses.count(a) || !poses.count(b)) return;
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) return;
    edges.push_back({a, b, poses.at(a) * poses.at(b).inverse()});
  };
  for (const auto& [id, kf] : map.keyframes()) {
    if (kf.parent != map::kNone) add(id, kf.parent);
  }
  for (const auto& [id, kf] : map.keyframes()) {
    for (map::KeyFrameId other : kf.loop_edges) add(id, other);
  }
  for (const auto& [id, kf] : map.keyframes()) {
    for (const auto& [other, n] : kf.covisibility(min_covisibility)) add(id, other);
  }
  return edges;
}

geometry::Vector7 essential_edge_residual(const EssentialEdge& e, const Sim3Transform& S_a, const Sim3Transform& S_b) {
  return geometry::sim3_log(e.measurement.inverse() * S_a * S_b.inverse());
}

optim::SolveReport optimize_essential_graph(std::map<map::KeyFrameId, Sim3Transform>& poses,
                                            const std::vector<EssentialEdge>& edges,
                                            const std::set<map::KeyFrameId>& fixed, int max_iterations) {
  optim::ParameterStore store;
  std::map<map::KeyFrameId, optim::ParamId> ids;
  for (const auto& [id, S] : poses) {
    ids[id] = store.add_sim3(S);
    if (fixed.count(id)) store.set_fixed(ids[id]);
  }
  std::vector<optim::ResidualBlock> blocks;
  for (const EssentialEdge& e : edges) {
    if (!ids.count(e.a) || !ids.count(e.b)) continue;
    optim::ResidualBlock b;
    b.dim = 7;
    b.params = {ids[e.a], ids[e.b]};
    b.fn = [e](std::span<const double* const> p, Eigen::VectorXd& r, optim::Jacobians*) {
      r = essential_edge_residual(e, optim::ParameterStore::sim3_from_data(p[0]),
                                  optim::ParameterStore::sim3_from_data(p[1]));
    };
    blocks.push_back(std::move(b));
  }
  optim::SolverOptions so;
  so.max_iterations = max_iterations;
  const optim::SolveReport report = optim::solve(blocks, store, so);
  for (auto& [id, S] : poses) S = store.sim3(ids[id]);
  return report;
}

namespace {

void require_finite(const map::GlobalMap& map) {
  for (const auto& [id, kf] : map.keyframes()) {
    if (!kf.pose.translation().allFinite() || !kf.pose.rotation().coeffs().allFinite()) {
      throw Error(ErrorCode::kIllPosedProblem, "loop correction: non-finite keyframe pose");
    }
  }
  for (const auto& [id, p] : map.points()) {
    if (!p.position.allFinite()) throw Error(ErrorCode::kIllPosedProblem, "loop correction: non-finite point");
  }
}

int apply_correction(map::GlobalMap& map, const LoopCandidate& cand, const geometry::CameraIntrinsics& K,
                     const CorrectionOptions& options, optim::SolveReport& graph_report) {
  if (!cand.sim3) throw Error(ErrorCode::kInvalidArgument, "loop correction: candidate has no similarity");
  const map::KeyFrameId c = cand.current;
  const map::KeyFrameId m = cand.candidate;

  std::map<map::KeyFrameId, Sim3Transform> original;
  for (const auto& [id, kf] : map.keyframes()) original[id] = Sim3Transform(kf.pose);

  // 1. move the current neighbourhood and its points by the loop similarity
  std::vector<map::KeyFrameId> group = {c};
  for (map::KeyFrameId n : map.covisible(c)) {
    if (n != m) group.push_back(n);
  }
  std::map<map::KeyFrameId, Sim3Transform> start = original;
  for (map::KeyFrameId i : group) start[i] = original[i] * original[c].inverse() * cand.sim3->S_cw;
  std::map<map::MapPointId, map::KeyFrameId> reference;
  for (map::KeyFrameId i : group) {
    for (map::MapPointId pid : map.keyframe(i).map_point_links) {
      if (pid == map::kNone || reference.count(pid)) continue;
      reference[pid] = i;
      map::MapPoint& p = map.point(pid);
      p.position = start[i].inverse() * (original[i] * p.position);
    }
  }
  for (map::KeyFrameId i : group) map.keyframe(i).pose = start[i].to_se3();

  // 2. fuse with the loop side
  int fused = 0;
  for (const LoopMatch& lm : cand.sim3->matches) {
    const map::MapPointId loop_point = map.resolve(lm.point);
    if (loop_point == map::kNone || map.point(loop_point).observations.count(c)) continue;
    const map::MapPointId existing = map.keyframe(c).map_point_links[lm.keypoint];
    if (existing == loop_point) continue;
    if (existing != map::kNone) {
      map.replace_point(existing, loop_point);
    } else {
      map.add_observation(loop_point, c, lm.keypoint);
    }
    ++fused;
  }
  std::vector<map::MapPointId> loop_points;
  std::vector<map::KeyFrameId> loop_region = map.covisible(m);
  loop_region.push_back(m);
  for (map::KeyFrameId k : loop_region) {
    for (map::MapPointId pid : map.keyframe(k).map_point_links) {
      if (pid != map::kNone) loop_points.push_back(pid);
    }
  }
  std::sort(loop_points.begin(), loop_points.end());
  loop_points.erase(std::unique(loop_points.begin(), loop_points.end()), loop_points.end());
  for (map::KeyFrameId i : group) fused += mapping::fuse_points(map, i, loop_points, K, options.fusion);
  map.add_loop_edge(c, m);

  // 3. essential graph; measurements from the poses before the correction,
  // except the loop edge which carries the loop similarity
  std::vector<EssentialEdge> edges = essential_graph_edges(map, original, options.min_covisibility);
  for (EssentialEdge& e : edges) {
    if ((e.a == c && e.b == m) || (e.a == m && e.b == c)) {
      e.measurement = e.a == c ? cand.sim3->S_cw * original[m].inverse()
                               : original[m] * cand.sim3->S_cw.inverse();
    }
  }
  edges.insert(edges.end(), options.extra_edges.begin(), options.extra_edges.end());
  std::map<map::KeyFrameId, Sim3Transform> optimized = start;
  graph_report = optimize_essential_graph(optimized, edges, {m}, options.graph_iterations);
  if (!std::isfinite(graph_report.final_cost)) {
    throw Error(ErrorCode::kIllPosedProblem, "loop correction: essential graph diverged");
  }

  for (const auto& [id, p] : map.points()) {
    if (reference.count(id) && map.has_keyframe(reference[id]) && p.observations.count(reference[id])) continue;
    reference[id] = p.observations.begin()->first;
  }
  for (auto& [id, kf] : map.keyframes()) {
    (void)kf;
    map.keyframe(id).pose = optimized[id].to_se3();
  }
  for (const auto& [pid, ref] : reference) {
    if (!map.has_point(pid)) continue;
    map::MapPoint& p = map.point(pid);
    p.position = optimized[ref].inverse() * (start[ref] * p.position);
  }
  require_finite(map);
  return fused;
}

}  // namespace

CorrectionReport correct_loop(map::GlobalMap& map, const LoopCandidate& candidate,
                              const geometry::CameraIntrinsics& K, const CorrectionOptions& options) {
  const map::GlobalMap snapshot = map;
  CorrectionReport report;
  try {
    report.fused = apply_correction(map, candidate, K, options, report.graph);
    if (options.run_global_ba) {
      report.ba = mapping::global_bundle_adjust(map, K, options.ba);
      require_finite(map);
    }
    report.applied = true;
  } catch (const Error& e) {
    map = snapshot;
    report.applied = false;
    report.failure = std::string(error_code_name(e.code())) + ": " + e.what();
  }
  return report;
}

}  // namespace kpslam::loop
