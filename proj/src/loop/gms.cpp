#include "kpslam/loop/gms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace kpslam::loop {

namespace {

int cell_of(const Eigen::Vector2d& p, ImageSize size, const GmsOptions& o) {
  const int cx = std::clamp(static_cast<int>(p.x() / size.width * o.cols), 0, o.cols - 1);
  const int cy = std::clamp(static_cast<int>(p.y() / size.height * o.rows), 0, o.rows - 1);
  return cy * o.cols + cx;
}

}  // namespace

std::vector<int> gms_filter(const std::vector<Eigen::Vector2d>& points_a,
                            const std::vector<Eigen::Vector2d>& points_b,
                            const std::vector<std::pair<int, int>>& matches, ImageSize size_a, ImageSize size_b,
                            const GmsOptions& options) {
  const int n_cells = options.rows * options.cols;
  std::vector<int> ca(matches.size()), cb(matches.size());
  std::vector<std::map<int, int>> motion(n_cells);  // cell in a -> (cell in b -> count)
  std::vector<int> leaving(n_cells, 0);
  for (size_t m = 0; m < matches.size(); ++m) {
    ca[m] = cell_of(points_a[matches[m].first], size_a, options);
    cb[m] = cell_of(points_b[matches[m].second], size_b, options);
    ++motion[ca[m]][cb[m]];
    ++leaving[ca[m]];
  }
  auto near = [&](int c, int d) {
    return std::abs(c % options.cols - d % options.cols) <= 1 && std::abs(c / options.cols - d / options.cols) <= 1;
  };
  std::map<std::pair<int, int>, bool> verdict;
  std::vector<int> kept;
  for (size_t m = 0; m < matches.size(); ++m) {
    const auto key = std::make_pair(ca[m], cb[m]);
    auto it = verdict.find(key);
    if (it == verdict.end()) {
      const int x = ca[m] % options.cols, y = ca[m] / options.cols;
      double support = 0.0, total = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (x + dx < 0 || y + dy < 0 || x + dx >= options.cols || y + dy >= options.rows) continue;
          const int c = (y + dy) * options.cols + x + dx;
          total += leaving[c];
          for (const auto& [target, n] : motion[c]) support += near(target, cb[m]) ? n : 0;
        }
      }
      it = verdict.emplace(key, support > options.alpha * std::sqrt(total / 9.0)).first;
    }
    if (it->second) kept.push_back(static_cast<int>(m));
  }
  return kept;
}

std::vector<std::pair<int, int>> mutual_nearest_matches(const std::vector<features::BinaryDescriptor>& a,
                                                        const std::vector<features::BinaryDescriptor>& b,
                                                        int max_hamming) {
  std::vector<int> best_b(a.size(), -1), best_a(b.size(), -1);
  std::vector<int> dist_b(b.size(), std::numeric_limits<int>::max());
  for (size_t i = 0; i < a.size(); ++i) {
    int best = -1, best_dist = std::numeric_limits<int>::max();
    for (size_t j = 0; j < b.size(); ++j) {
      const int h = features::hamming(a[i], b[j]);
      if (h < best_dist) {
        best_dist = h;
        best = static_cast<int>(j);
      }
      if (h < dist_b[j]) {
        dist_b[j] = h;
        best_a[j] = static_cast<int>(i);
      }
    }
    if (best_dist <= max_hamming) best_b[i] = best;
  }
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < a.size(); ++i) {
    if (best_b[i] >= 0 && best_a[best_b[i]] == static_cast<int>(i)) out.emplace_back(static_cast<int>(i), best_b[i]);
  }
  return out;
}

}  // namespace kpslam::loop
