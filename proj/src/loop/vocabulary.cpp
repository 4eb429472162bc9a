#include "kpslam/loop/vocabulary.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <tuple>

#include "kpslam/common/error.h"
#include "kpslam/common/popcount.h"

namespace kpslam::loop {

namespace {

// Index and distance of the nearest of n centroids stored back to back.
KPSLAM_POPCNT_CLONES std::pair<int, int> scan_leaves(const std::uint64_t* centroids, int n, int words,
                                                     const std::uint64_t* q) {
  int best = -1;
  int best_dist = std::numeric_limits<int>::max();
  for (int leaf = 0; leaf < n; ++leaf) {
    const std::uint64_t* c = centroids + static_cast<size_t>(leaf) * words;
    int h = 0;
    for (int k = 0; k < words; ++k) h += std::popcount(q[k] ^ c[k]);
    if (h < best_dist) {
      best_dist = h;
      best = leaf;
    }
  }
  return {best, best_dist};
}

}  // namespace

int Vocabulary::nearest_leaf(const features::BinaryDescriptor& d, int* distance) const {
  int best = -1;
  int best_dist = std::numeric_limits<int>::max();
  if (!nodes_.empty()) {
    features::hamming(d, nodes_[0].centroid);  // rejects mismatched dimensions
    std::tie(best, best_dist) =
        scan_leaves(centroid_words_.data(), static_cast<int>(nodes_.size()), words_per_leaf_, d.words().data());
  }
  if (distance) *distance = best_dist;
  return best;
}

VocabAddResult Vocabulary::add(map::KeyFrameId kf, const std::vector<features::BinaryDescriptor>& descriptors) {
  if (keyframe_terms_.count(kf)) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary: keyframe " + std::to_string(kf) + " already indexed");
  }
  VocabAddResult result;
  std::map<int, int>& terms = keyframe_terms_[kf];
  for (int i = 0; i < static_cast<int>(descriptors.size()); ++i) {
    int dist = 0;
    int leaf = nearest_leaf(descriptors[i], &dist);
    if (leaf < 0 || dist > join_threshold_) {
      VocabularyNode node;
      node.id = static_cast<int>(nodes_.size());
      node.centroid = descriptors[i];
      if (nodes_.empty()) words_per_leaf_ = static_cast<int>(descriptors[i].words().size());
      centroid_words_.insert(centroid_words_.end(), descriptors[i].words().begin(), descriptors[i].words().end());
      nodes_.push_back(std::move(node));
      leaf = nodes_.back().id;
      dist = 0;
      ++result.new_leaves;
    }
    VocabularyNode& node = nodes_[leaf];
    node.postings.emplace_back(kf, i);
    node.join_distances.push_back(dist);
    ++node.term_counts[kf];
    ++terms[leaf];
    result.assignments.push_back(leaf);
  }
  result.bow = bow_from_terms(terms);
  return result;
}

VocabAddResult Vocabulary::add(map::GlobalMap& map, map::KeyFrameId kf) {
  VocabAddResult r = add(kf, map.keyframe(kf).descriptors);
  map::KeyFrame& k = map.keyframe(kf);
  k.word_counts = keyframe_terms_.at(kf);
  k.bow = r.bow;
  return r;
}

double Vocabulary::idf(int leaf) const {
  const int touching = static_cast<int>(nodes_.at(leaf).term_counts.size());
  if (touching == 0) return 0.0;
  return std::log(static_cast<double>(n_keyframes()) / touching);
}

map::BowVector Vocabulary::bow_from_terms(const std::map<int, int>& terms) const {
  map::BowVector v;
  int total = 0;
  for (const auto& [leaf, n] : terms) total += n;
  if (total == 0) return v;
  double l1 = 0.0;
  for (const auto& [leaf, n] : terms) {
    const double w = static_cast<double>(n) / total * idf(leaf);
    if (w > 0.0) {
      v[leaf] = w;
      l1 += w;
    }
  }
  for (auto& [leaf, w] : v) w /= l1;
  return v;
}

map::BowVector Vocabulary::bow(map::KeyFrameId kf) const { return bow_from_terms(keyframe_terms_.at(kf)); }

std::vector<std::pair<map::KeyFrameId, double>> Vocabulary::query(map::KeyFrameId kf,
                                                                  const std::set<map::KeyFrameId>& exclude,
                                                                  bool include_self) const {
  const auto& terms = keyframe_terms_.at(kf);
  std::set<map::KeyFrameId> candidates;
  for (const auto& [leaf, n] : terms) {
    for (const auto& [other, count] : nodes_[leaf].term_counts) {
      if (exclude.count(other) || (other == kf && !include_self)) continue;
      candidates.insert(other);
    }
  }
  const map::BowVector v = bow_from_terms(terms);
  std::vector<std::pair<map::KeyFrameId, double>> ranked;
  for (map::KeyFrameId other : candidates) ranked.emplace_back(other, bow_score(v, bow(other)));
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

std::vector<std::string> Vocabulary::audit() const {
  std::vector<std::string> issues;
  for (const VocabularyNode& node : nodes_) {
    for (size_t k = 0; k < node.join_distances.size(); ++k) {
      if (node.join_distances[k] > join_threshold_) {
        issues.push_back("leaf " + std::to_string(node.id) + ": posting " + std::to_string(k) +
                         " joined beyond the threshold");
      }
    }
  }
  return issues;
}

double bow_score(const map::BowVector& v, const map::BowVector& w) {
  double lv = 0.0, lw = 0.0;
  for (const auto& [k, x] : v) lv += std::abs(x);
  for (const auto& [k, x] : w) lw += std::abs(x);
  if (lv == 0.0 || lw == 0.0) return 0.0;
  double diff = 0.0;
  bool shared = false;
  auto a = v.begin();
  auto b = w.begin();
  while (a != v.end() || b != w.end()) {
    if (b == w.end() || (a != v.end() && a->first < b->first)) {
      diff += std::abs(a->second / lv);
      ++a;
    } else if (a == v.end() || b->first < a->first) {
      diff += std::abs(b->second / lw);
      ++b;
    } else {
      diff += std::abs(a->second / lv - b->second / lw);
      shared = true;
      ++a;
      ++b;
    }
  }
  if (!shared) return 0.0;
  return std::clamp(1.0 - 0.5 * diff, 0.0, 1.0);
}

std::set<map::KeyFrameId> loop_exclusions(const map::GlobalMap& map, map::KeyFrameId kf, int recent) {
  std::set<map::KeyFrameId> out = {kf};
  for (map::KeyFrameId other : map.covisible(kf)) out.insert(other);
  int taken = 0;
  for (auto it = map.keyframes().rbegin(); it != map.keyframes().rend() && taken < recent; ++it, ++taken) {
    out.insert(it->first);
  }
  return out;
}

}  // namespace kpslam::loop
