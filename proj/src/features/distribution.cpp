#include "kpslam/features/distribution.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kpslam/common/error.h"

namespace kpslam::features {

namespace {

bool better(const std::vector<Keypoint>& c, int a, int b) {
  if (c[a].score != c[b].score) return c[a].score > c[b].score;
  return a < b;
}

}  // namespace

std::vector<int> level_quotas(int budget, const PyramidLayout& layout) {
  const int n = layout.n_levels();
  std::vector<double> areas(n);
  for (int k = 0; k < n; ++k) {
    areas[k] = static_cast<double>(layout.sizes[k].first) * layout.sizes[k].second;
  }
  const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
  std::vector<int> quotas(n);
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int k = 0; k < n; ++k) {
    const double exact = budget * areas[k] / total;
    quotas[k] = static_cast<int>(std::floor(exact));
    assigned += quotas[k];
    remainders.emplace_back(exact - quotas[k], k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; assigned < budget; ++i, ++assigned) ++quotas[remainders[i % n].second];
  return quotas;
}

std::vector<int> select_keypoints(const std::vector<Keypoint>& candidates, int budget,
                                  GridSize grid, const PyramidLayout& layout) {
  if (budget <= 0) throw Error(ErrorCode::kInvalidArgument, "distribute_keypoints: budget must be > 0");
  if (grid.rows <= 0 || grid.cols <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "distribute_keypoints: grid must be non-empty");
  }
  const int n_levels = layout.n_levels();
  for (const Keypoint& kp : candidates) {
    if (kp.octave < 0 || kp.octave >= n_levels) {
      throw Error(ErrorCode::kInvalidArgument, "distribute_keypoints: octave out of range");
    }
  }
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return better(candidates, a, b); });
  if (static_cast<int>(candidates.size()) <= budget) return order;

  const double w0 = layout.sizes[0].first;
  const double h0 = layout.sizes[0].second;
  const int n_cells = grid.rows * grid.cols;
  const std::vector<int> quotas = level_quotas(budget, layout);

  std::vector<char> kept(candidates.size(), 0);
  int n_kept = 0;
  for (int level = 0; level < n_levels; ++level) {
    const int cell_quota = (quotas[level] + n_cells - 1) / n_cells;
    std::vector<int> per_cell(n_cells, 0);
    std::vector<int> level_kept;
    for (int idx : order) {
      const Keypoint& kp = candidates[idx];
      if (kp.octave != level) continue;
      const int cx = std::clamp(static_cast<int>(kp.position.x() / w0 * grid.cols), 0, grid.cols - 1);
      const int cy = std::clamp(static_cast<int>(kp.position.y() / h0 * grid.rows), 0, grid.rows - 1);
      int& count = per_cell[cy * grid.cols + cx];
      if (count < cell_quota) {
        ++count;
        level_kept.push_back(idx);
      }
    }
    // level_kept is in descending score order; drop the weakest beyond the level quota
    if (static_cast<int>(level_kept.size()) > quotas[level]) level_kept.resize(quotas[level]);
    for (int idx : level_kept) kept[idx] = 1;
    n_kept += static_cast<int>(level_kept.size());
  }

  // redistribution of budget left unused by sparse cells or levels
  for (int idx : order) {
    if (n_kept >= budget) break;
    if (!kept[idx]) {
      kept[idx] = 1;
      ++n_kept;
    }
  }
  std::vector<int> out;
  out.reserve(n_kept);
  for (int idx : order) {
    if (kept[idx]) out.push_back(idx);
  }
  return out;
}

std::vector<Keypoint> distribute_keypoints(const std::vector<Keypoint>& candidates, int budget,
                                           GridSize grid, const PyramidLayout& layout) {
  std::vector<Keypoint> out;
  for (int idx : select_keypoints(candidates, budget, grid, layout)) out.push_back(candidates[idx]);
  return out;
}

}  // namespace kpslam::features
