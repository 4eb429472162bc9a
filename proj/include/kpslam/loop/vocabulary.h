#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kpslam/map/global_map.h"

namespace kpslam::loop {

inline constexpr int kDefaultJoinThreshold = 48;

struct VocabularyNode {
  int id = 0;
  features::BinaryDescriptor centroid;
  std::vector<std::pair<map::KeyFrameId, int>> postings;  // (keyframe, keypoint index)
  std::vector<int> join_distances;                        // Hamming to centroid at insertion, per posting
  std::map<map::KeyFrameId, int> term_counts;             // keyframe -> occurrences
};

struct VocabAddResult {
  map::BowVector bow;
  std::vector<int> assignments;  // leaf per descriptor
  int new_leaves = 0;
};

/// Online binary vocabulary: a flat set of leaves grown as keyframes arrive.
/// A descriptor joins its nearest leaf when within the join threshold and
/// founds a new leaf otherwise.
class Vocabulary {
 public:
  explicit Vocabulary(int join_threshold = kDefaultJoinThreshold) : join_threshold_(join_threshold) {}

  int join_threshold() const { return join_threshold_; }
  int n_leaves() const { return static_cast<int>(nodes_.size()); }
  int n_keyframes() const { return static_cast<int>(keyframe_terms_.size()); }
  const std::vector<VocabularyNode>& nodes() const { return nodes_; }
  bool contains(map::KeyFrameId kf) const { return keyframe_terms_.count(kf) > 0; }

  /// Nearest leaf (lowest id on ties), or -1 for an empty vocabulary.
  int nearest_leaf(const features::BinaryDescriptor& d, int* distance = nullptr) const;

  /// Inserts the descriptors of a keyframe. Throws kInvalidArgument if the
  /// keyframe is already indexed.
  VocabAddResult add(map::KeyFrameId kf, const std::vector<features::BinaryDescriptor>& descriptors);

  /// Inserts a map keyframe and stores its word counts and BoW vector on it.
  VocabAddResult add(map::GlobalMap& map, map::KeyFrameId kf);

  /// ln(indexed keyframes / keyframes touching the leaf).
  double idf(int leaf) const;

  /// tf-idf vector of an indexed keyframe under the current idf weights.
  map::BowVector bow(map::KeyFrameId kf) const;

  /// Indexed keyframes sharing at least one leaf with `kf`, scored against it
  /// and sorted by descending score (ascending id on ties). `exclude` and `kf`
  /// itself when `include_self` is false are omitted.
  std::vector<std::pair<map::KeyFrameId, double>> query(map::KeyFrameId kf, const std::set<map::KeyFrameId>& exclude,
                                                        bool include_self = false) const;

  /// Violations of the join invariant; empty when consistent.
  std::vector<std::string> audit() const;

 private:
  map::BowVector bow_from_terms(const std::map<int, int>& terms) const;

  int join_threshold_;
  std::vector<VocabularyNode> nodes_;
  std::vector<std::uint64_t> centroid_words_;  // all centroids back to back, for the leaf scan
  int words_per_leaf_ = 0;
  std::map<map::KeyFrameId, std::map<int, int>> keyframe_terms_;  // leaf -> count
};

/// 1 - 0.5 |v/|v|_1 - w/|w|_1|_1; 0 when either vector is empty.
double bow_score(const map::BowVector& v, const map::BowVector& w);

/// Keyframes not to be considered as loop candidates for `kf`: its covisible
/// neighbours, itself, and the `recent` most recent keyframes.
std::set<map::KeyFrameId> loop_exclusions(const map::GlobalMap& map, map::KeyFrameId kf, int recent = 10);

}  // namespace kpslam::loop
