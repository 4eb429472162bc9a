#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kpslam/loop/gms.h"
#include "kpslam/loop/sim3_solver.h"
#include "kpslam/loop/vocabulary.h"

namespace kpslam::loop {

enum class LoopVerdict { kPending, kRejected, kAccepted };

const char* verdict_name(LoopVerdict v);

struct LoopCandidate {
  map::KeyFrameId current = map::kNone;
  map::KeyFrameId candidate = map::kNone;
  double score = 0.0;
  std::vector<std::pair<int, int>> matches;  // (current keypoint, candidate keypoint) after GMS
  std::optional<LoopSim3> sim3;
  int consistency = 0;  // consecutive keyframes whose best candidate fell in the same region
  LoopVerdict verdict = LoopVerdict::kPending;
  std::string reason;

  int n_gms() const { return static_cast<int>(matches.size()); }
  int n_inliers() const { return sim3 ? sim3->n_inliers : 0; }
};

struct LoopDetectorOptions {
  int min_matches = 20;
  int consistency = 3;
  int recent_exclusion = 10;
  double min_score = 0.0;
  int max_hamming = 64;
  GmsOptions gms;
  Sim3Options sim3;
};

/// Top candidate of `kf` under the vocabulary, with loop exclusions applied.
std::optional<std::pair<map::KeyFrameId, double>> best_loop_candidate(const map::GlobalMap& map,
                                                                      const Vocabulary& vocab, map::KeyFrameId kf,
                                                                      int recent_exclusion = 10);

/// Mutual-nearest matching of two keyframes filtered by GMS.
std::vector<std::pair<int, int>> verified_matches(const map::GlobalMap& map, map::KeyFrameId a, map::KeyFrameId b,
                                                  const geometry::CameraIntrinsics& K, int max_hamming = 64,
                                                  const GmsOptions& gms = {});

/// Keeps the candidate-region history across keyframes. A candidate is
/// verified only after its region (the candidate and its covisible
/// neighbours) has won the query for `consistency` consecutive keyframes.
class LoopDetector {
 public:
  explicit LoopDetector(LoopDetectorOptions options = {}) : options_(std::move(options)) {}

  const LoopDetectorOptions& options() const { return options_; }

  /// `kf` must already be in the map and the vocabulary. Empty when the
  /// query yields no candidate.
  std::optional<LoopCandidate> detect(const map::GlobalMap& map, const Vocabulary& vocab, map::KeyFrameId kf,
                                      const geometry::CameraIntrinsics& K);

  /// Drops the consistency history, e.g. after a correction.
  void reset() { groups_.clear(); }

 private:
  struct Group {
    std::set<map::KeyFrameId> region;
    int count = 0;
  };

  LoopDetectorOptions options_;
  std::vector<Group> groups_;
};

/// One line per candidate: `kf_id candidate_id score n_gms n_inliers verdict`.
std::string loop_log_line(const LoopCandidate& c);

}  // namespace kpslam::loop
