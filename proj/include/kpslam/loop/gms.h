#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kpslam/features/descriptor.h"

namespace kpslam::loop {

struct GmsOptions {
  int rows = 20;
  int cols = 20;
  double alpha = 6.0;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Grid-based motion statistics. A match (i in a, j in b) falls into cell
/// pair (ca, cb); its support is the number of matches leaving the 3x3 cell
/// neighbourhood of ca that land in the 3x3 neighbourhood of cb. The pair is
/// kept when support > alpha * sqrt(mean matches per cell over ca's
/// neighbourhood). Returns the indices of kept matches, in input order.
std::vector<int> gms_filter(const std::vector<Eigen::Vector2d>& points_a,
                            const std::vector<Eigen::Vector2d>& points_b,
                            const std::vector<std::pair<int, int>>& matches, ImageSize size_a, ImageSize size_b,
                            const GmsOptions& options = {});

/// Brute-force mutual nearest neighbours with Hamming <= max_hamming.
std::vector<std::pair<int, int>> mutual_nearest_matches(const std::vector<features::BinaryDescriptor>& a,
                                                        const std::vector<features::BinaryDescriptor>& b,
                                                        int max_hamming = 64);

}  // namespace kpslam::loop
