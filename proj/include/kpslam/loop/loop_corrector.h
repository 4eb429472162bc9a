#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kpslam/loop/loop_detector.h"
#include "kpslam/mapping/local_mapping.h"

namespace kpslam::loop {

/// Relative similarity constraint S_a * S_b^-1 = measurement between two
/// keyframe similarity poses (world to camera).
struct EssentialEdge {
  map::KeyFrameId a = map::kNone;
  map::KeyFrameId b = map::kNone;
  geometry::Sim3Transform measurement;
};

/// Spanning-tree edges, covisibility edges of at least `min_covisibility`
/// shared points and loop edges, each pair once. Measurements come from `poses`.
std::vector<EssentialEdge> essential_graph_edges(const map::GlobalMap& map,
                                                 const std::map<map::KeyFrameId, geometry::Sim3Transform>& poses,
                                                 int min_covisibility = 100);

/// Residual of an edge: log(measurement^-1 * S_a * S_b^-1).
geometry::Vector7 essential_edge_residual(const EssentialEdge& e, const geometry::Sim3Transform& S_a,
                                          const geometry::Sim3Transform& S_b);

/// Optimizes the similarity poses in place; keyframes in `fixed` are held.
optim::SolveReport optimize_essential_graph(std::map<map::KeyFrameId, geometry::Sim3Transform>& poses,
                                            const std::vector<EssentialEdge>& edges,
                                            const std::set<map::KeyFrameId>& fixed, int max_iterations = 20);

struct CorrectionOptions {
  int min_covisibility = 100;
  int graph_iterations = 20;
  bool run_global_ba = true;
  mapping::BundleAdjustOptions ba;
  mapping::LocalMappingOptions fusion;
  std::vector<EssentialEdge> extra_edges;  // appended to the essential graph
};

struct CorrectionReport {
  bool applied = false;
  std::string failure;
  int fused = 0;
  optim::SolveReport graph;
  std::optional<mapping::BundleAdjustResult> ba;
};

/// Closes an accepted loop: moves the current keyframe's neighbourhood and
/// its points by the loop similarity, fuses duplicates with the loop side,
/// optimizes the essential graph with the loop keyframe fixed, then runs a
/// global bundle adjustment. On any failure the map is restored to its state
/// before the call and `applied` is false.
CorrectionReport correct_loop(map::GlobalMap& map, const LoopCandidate& candidate,
                              const geometry::CameraIntrinsics& K, const CorrectionOptions& options = {});

}  // namespace kpslam::loop
