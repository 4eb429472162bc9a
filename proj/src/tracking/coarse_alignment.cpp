#include "kpslam/tracking/coarse_alignment.h"

#include <algorithm>
#include <cmath>

#include "kpslam/common/error.h"

namespace kpslam::tracking {

using geometry::SE3Pose;
using geometry::Vector2;
using geometry::Vector3;

namespace {

struct PatchGeometry {
  std::vector<Vector2> offsets;
  double half_extent = 0.0;
};

PatchGeometry patch_geometry(int patch_size) {
  PatchGeometry g;
  g.half_extent = 0.5 * (patch_size - 1);
  for (int y = 0; y < patch_size; ++y) {
    for (int x = 0; x < patch_size; ++x) {
      g.offsets.emplace_back(x - g.half_extent, y - g.half_extent);
    }
  }
  return g;
}

// Pyramid levels plus optional coarser ones built on top.
class LevelStack {
 public:
  LevelStack(const features::ImagePyramid& pyr, int extra_levels) {
    extra_.reserve(std::max(extra_levels, 0));
    for (int k = 0; k < pyr.n_levels(); ++k) {
      images_.push_back(&pyr.level(k));
      scales_.push_back(pyr.scale(k));
    }
    const double s = pyr.scale_factor();
    for (int e = 0; e < extra_levels; ++e) {
      const features::GrayImage& top = *images_.back();
      const int w = static_cast<int>(std::floor(top.width() / s + 1e-9));
      const int h = static_cast<int>(std::floor(top.height() / s + 1e-9));
      if (w < 16 || h < 16) break;
      extra_.push_back(features::downsample(top, w, h, s));
      images_.push_back(&extra_.back());
      scales_.push_back(scales_.back() * s);
    }
  }

  int size() const { return static_cast<int>(images_.size()); }
  const features::GrayImage& image(int k) const { return *images_[k]; }
  double scale(int k) const { return scales_[k]; }
  Vector2 to_level(const Vector2& u0, int k) const { return (u0.array() + 0.5) / scales_[k] - 0.5; }

 private:
  std::vector<const features::GrayImage*> images_;
  std::vector<double> scales_;
  std::vector<features::GrayImage> extra_;
};

int sample_level(const LevelStack& stack, int level, int octave) {
  return std::min(std::max(level, octave), stack.size() - 1);
}

// Reference patch in the last frame, or false when it is clipped.
bool reference_patch(const LevelStack& stack, int lv, const Vector2& u0, const PatchGeometry& g,
                     std::vector<double>& out) {
  const features::GrayImage& img = stack.image(lv);
  const Vector2 c = stack.to_level(u0, lv);
  if (!img.contains(c.x(), c.y(), g.half_extent)) return false;
  out.resize(g.offsets.size());
  for (size_t j = 0; j < g.offsets.size(); ++j) {
    out[j] = img.bilinear(c.x() + g.offsets[j].x(), c.y() + g.offsets[j].y());
  }
  return true;
}

bool current_in_bounds(const LevelStack& stack, int lv, const geometry::CameraIntrinsics& K,
                       const Vector3& p_c, const PatchGeometry& g) {
  if (p_c.z() <= 1e-6) return false;
  const Vector2 c = stack.to_level(geometry::project_unchecked(K, p_c), lv);
  return stack.image(lv).contains(c.x(), c.y(), g.half_extent);
}

void require_pyramids(const map::Frame& last, const map::Frame& current) {
  if (!last.pyramid || !current.pyramid) {
    throw Error(ErrorCode::kCoarseAlignmentFailed, "coarse alignment: frame has no image");
  }
  if (last.pyramid->n_levels() != current.pyramid->n_levels() ||
      last.pyramid->scale_factor() != current.pyramid->scale_factor()) {
    throw Error(ErrorCode::kInvalidArgument, "coarse alignment: pyramids differ between frames");
  }
}

struct LevelProblem {
  std::vector<optim::ResidualBlock> blocks;
  std::vector<int> point_index;  // per block
};

LevelProblem build_level(const LevelStack& last, const LevelStack& cur,
                         const std::vector<AlignmentPoint>& points, const std::vector<bool>& active,
                         int level, const SE3Pose& T, optim::ParamId pose_id,
                         const geometry::CameraIntrinsics& K, const PatchGeometry& g,
                         const CoarseAlignmentOptions& options) {
  LevelProblem problem;
  for (size_t i = 0; i < points.size(); ++i) {
    if (!active[i]) continue;
    const AlignmentPoint& pt = points[i];
    const int lv = sample_level(cur, level, pt.octave);
    std::vector<double> ref;
    if (!reference_patch(last, lv, geometry::project_unchecked(K, pt.p_last), g, ref)) continue;
    if (!current_in_bounds(cur, lv, K, T * pt.p_last, g)) continue;

    optim::ResidualBlock block;
    block.dim = static_cast<int>(g.offsets.size());
    block.params = {pose_id};
    block.analytic_jacobian = true;
    block.huber_delta = options.huber_delta;
    block.robust_per_component = true;
    block.fn = [&cur, lv, ref = std::move(ref), p = pt.p_last, &g, &K](
                   std::span<const double* const> params, Eigen::VectorXd& r, optim::Jacobians* J) {
      const Vector3 p_c = optim::ParameterStore::se3_from_data(params[0]) * p;
      r.setZero(static_cast<Eigen::Index>(ref.size()));
      if (J) (*J)[0].setZero(r.size(), 6);
      if (p_c.z() <= 1e-6) return;
      const features::GrayImage& img = cur.image(lv);
      const Vector2 c = cur.to_level(geometry::project_unchecked(K, p_c), lv);
      geometry::Matrix26 Jp;
      if (J) Jp = geometry::projection_pose_jacobian(K, p_c) / cur.scale(lv);
      for (size_t j = 0; j < ref.size(); ++j) {
        const double x = c.x() + g.offsets[j].x();
        const double y = c.y() + g.offsets[j].y();
        r[j] = img.bilinear(x, y) - ref[j];
        if (J) (*J)[0].row(j) = img.bilinear_gradient(x, y).transpose() * Jp;
      }
    };
    problem.blocks.push_back(std::move(block));
    problem.point_index.push_back(static_cast<int>(i));
  }
  if (static_cast<int>(problem.blocks.size()) < options.min_blocks) {
    throw Error(ErrorCode::kCoarseAlignmentFailed,
                "coarse alignment: only " + std::to_string(problem.blocks.size()) +
                    " patches inside the image at level " + std::to_string(level));
  }
  return problem;
}

SE3Pose solve_level(const LevelProblem& problem, optim::ParameterStore& store, optim::ParamId pose_id,
                    const CoarseAlignmentOptions& options) {
  optim::SolverOptions solver;
  solver.max_iterations = options.max_iterations;
  try {
    optim::solve(problem.blocks, store, solver);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCoarseAlignmentFailed, std::string("coarse alignment: ") + e.what());
  }
  return store.se3(pose_id);
}

// Occlusion and overlapping texture leave a few patches that no pose
// explains; they are dropped and the finest level solved again.
SE3Pose trim_and_resolve(const LevelStack& ls, const LevelStack& cs,
                         const std::vector<AlignmentPoint>& points, std::vector<bool>& active,
                         SE3Pose T, const geometry::CameraIntrinsics& K, const PatchGeometry& g,
                         const CoarseAlignmentOptions& options) {
  for (int pass = 0; pass < options.trim_passes; ++pass) {
    optim::ParameterStore store;
    const optim::ParamId pose_id = store.add_se3(T);
    const LevelProblem problem = build_level(ls, cs, points, active, 0, T, pose_id, K, g, options);
    std::vector<double> rms(problem.blocks.size());
    Eigen::VectorXd r;
    for (size_t b = 0; b < problem.blocks.size(); ++b) {
      optim::evaluate_block(problem.blocks[b], store, r, nullptr);
      rms[b] = r.norm() / std::sqrt(static_cast<double>(r.size()));
    }
    std::vector<double> sorted = rms;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double threshold = std::max(options.trim_floor, options.trim_factor * sorted[sorted.size() / 2]);
    std::vector<bool> next = active;
    int kept = 0;
    for (size_t b = 0; b < problem.blocks.size(); ++b) {
      if (rms[b] > threshold) {
        next[problem.point_index[b]] = false;
      } else {
        ++kept;
      }
    }
    if (kept == static_cast<int>(problem.blocks.size()) || kept < options.min_blocks) break;
    active = std::move(next);
    optim::ParameterStore trimmed_store;
    const optim::ParamId trimmed_id = trimmed_store.add_se3(T);
    const LevelProblem trimmed = build_level(ls, cs, points, active, 0, T, trimmed_id, K, g, options);
    T = solve_level(trimmed, trimmed_store, trimmed_id, options);
  }
  return T;
}

}  // namespace

SE3Pose predict_initial_pose(const SE3Pose& coarse, const SE3Pose& last_pose) {
  auto is_identity = [](const SE3Pose& T) {
    return T.rotation().coeffs() == Eigen::Quaterniond::Identity().coeffs() &&
           T.translation() == Vector3::Zero();
  };
  if (is_identity(coarse)) return last_pose;
  if (is_identity(last_pose)) return coarse;
  return geometry::compose(coarse, last_pose);
}

std::vector<AlignmentPoint> alignment_points(const map::Frame& last, const map::GlobalMap& map) {
  std::vector<AlignmentPoint> out;
  for (size_t i = 0; i < last.size(); ++i) {
    const map::MapPointId id = map.resolve(last.map_point_links[i]);
    if (id == map::kNone) continue;
    const Vector3 p = last.pose * map.point(id).position;
    if (p.z() <= 1e-6) continue;
    out.push_back({p, last.keypoints[i].octave});
  }
  return out;
}

std::vector<double> photometric_residuals(const map::Frame& last, const map::Frame& current,
                                          const std::vector<AlignmentPoint>& points,
                                          const SE3Pose& T_cl, const geometry::CameraIntrinsics& K,
                                          int level, int patch_size) {
  require_pyramids(last, current);
  const PatchGeometry g = patch_geometry(patch_size);
  const LevelStack ls(*last.pyramid, 0), cs(*current.pyramid, 0);
  std::vector<double> out;
  std::vector<double> ref;
  for (const AlignmentPoint& pt : points) {
    const int lv = sample_level(ls, level, pt.octave);
    if (!reference_patch(ls, lv, geometry::project_unchecked(K, pt.p_last), g, ref)) continue;
    const Vector3 p_c = T_cl * pt.p_last;
    if (!current_in_bounds(cs, lv, K, p_c, g)) continue;
    const Vector2 c = cs.to_level(geometry::project_unchecked(K, p_c), lv);
    const features::GrayImage& img = cs.image(lv);
    for (size_t j = 0; j < g.offsets.size(); ++j) {
      out.push_back(img.bilinear(c.x() + g.offsets[j].x(), c.y() + g.offsets[j].y()) - ref[j]);
    }
  }
  return out;
}

SE3Pose coarse_align(const map::Frame& last, const map::Frame& current,
                     const std::vector<AlignmentPoint>& points, const SE3Pose& init,
                     const geometry::CameraIntrinsics& K, const CoarseAlignmentOptions& options) {
  require_pyramids(last, current);
  const PatchGeometry g = patch_geometry(options.patch_size);
  const LevelStack ls(*last.pyramid, options.extra_levels);
  const LevelStack cs(*current.pyramid, options.extra_levels);
  std::vector<bool> active(points.size(), true);
  SE3Pose T = init;
  for (int level = cs.size() - 1; level >= 0; --level) {
    optim::ParameterStore store;
    const optim::ParamId pose_id = store.add_se3(T);
    const LevelProblem problem = build_level(ls, cs, points, active, level, T, pose_id, K, g, options);
    T = solve_level(problem, store, pose_id, options);
    if (level == 0) T = trim_and_resolve(ls, cs, points, active, T, K, g, options);
  }
  return T;
}

}  // namespace kpslam::tracking
