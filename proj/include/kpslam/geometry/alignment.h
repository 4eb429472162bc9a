#pragma once

#include <vector>

#include "kpslam/geometry/sim3.h"

namespace kpslam::geometry {

/// Least-squares similarity (or rigid, when with_scale is false) transform S
/// minimizing sum |gt_i - S(est_i)|^2. Throws kDegenerateAlignment for fewer
/// than three pairs, mismatched lengths, or collinear input.
Sim3Transform umeyama_align(const std::vector<Vector3>& est, const std::vector<Vector3>& gt,
                            bool with_scale);

}  // namespace kpslam::geometry
