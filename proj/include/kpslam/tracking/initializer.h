#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "kpslam/map/frame.h"

namespace kpslam::tracking {

struct InitializerOptions {
  double ratio = 0.8;  // best / second-best Hamming distance
  int max_hamming = 64;
  int min_matches = 100;
  int min_points = 50;
  double min_median_parallax_deg = 1.0;
  double ransac_threshold = 1.0;  // pixels
  double chi2_threshold = 5.99;
};

/// Mutual nearest neighbours under Hamming distance that pass the ratio test.
/// Pairs are (index in a, index in b), ordered by index in a.
std::vector<std::pair<int, int>> match_brute_force(const std::vector<features::BinaryDescriptor>& a,
                                                   const std::vector<features::BinaryDescriptor>& b,
                                                   int max_hamming, double ratio);

struct TwoViewResult {
  geometry::SE3Pose pose_second;  // first camera is the world frame
  std::vector<std::pair<int, int>> matches;
  std::vector<geometry::Vector3> points;  // per match, scaled to median depth 1
  double median_parallax_deg = 0.0;
};

/// Two-view bootstrap: essential matrix by five-point RANSAC, triangulation of
/// the inliers, scale fixed so the median depth in the first view is 1. Empty
/// when the pair has too few matches, points or parallax.
std::optional<TwoViewResult> initialize_two_view(const map::Frame& first, const map::Frame& second,
                                                 const geometry::CameraIntrinsics& K,
                                                 const InitializerOptions& options = {});

}  // namespace kpslam::tracking
