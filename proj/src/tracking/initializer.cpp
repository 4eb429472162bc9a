#include "kpslam/tracking/initializer.h"

#include <algorithm>
#include <cmath>
#include <opencv2/calib3d.hpp>
#include <opencv2/core/eigen.hpp>

#include "kpslam/common/error.h"
#include "kpslam/geometry/triangulation.h"

namespace kpslam::tracking {

using geometry::SE3Pose;
using geometry::Vector2;
using geometry::Vector3;

namespace {

struct Nearest {
  int index = -1;
  int best = 1 << 20;
  int second = 1 << 20;
};

std::vector<Nearest> nearest(const std::vector<features::BinaryDescriptor>& from,
                             const std::vector<features::BinaryDescriptor>& to) {
  std::vector<Nearest> out(from.size());
  for (size_t i = 0; i < from.size(); ++i) {
    Nearest& n = out[i];
    for (size_t j = 0; j < to.size(); ++j) {
      const int d = features::hamming(from[i], to[j]);
      if (d < n.best) {
        n.second = n.best;
        n.best = d;
        n.index = static_cast<int>(j);
      } else if (d < n.second) {
        n.second = d;
      }
    }
  }
  return out;
}

double median(std::vector<double> v) {
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

}  // namespace

std::vector<std::pair<int, int>> match_brute_force(const std::vector<features::BinaryDescriptor>& a,
                                                   const std::vector<features::BinaryDescriptor>& b,
                                                   int max_hamming, double ratio) {
  const std::vector<Nearest> ab = nearest(a, b);
  const std::vector<Nearest> ba = nearest(b, a);
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < a.size(); ++i) {
    const Nearest& n = ab[i];
    if (n.index < 0 || n.best > max_hamming) continue;
    if (ba[n.index].index != static_cast<int>(i)) continue;
    if (n.best >= ratio * n.second) continue;
    out.emplace_back(static_cast<int>(i), n.index);
  }
  return out;
}

std::optional<TwoViewResult> initialize_two_view(const map::Frame& first, const map::Frame& second,
                                                 const geometry::CameraIntrinsics& K,
                                                 const InitializerOptions& options) {
  const std::vector<std::pair<int, int>> matches =
      match_brute_force(first.descriptors, second.descriptors, options.max_hamming, options.ratio);
  if (static_cast<int>(matches.size()) < options.min_matches) return std::nullopt;

  std::vector<cv::Point2d> pa, pb;
  for (const auto& [i, j] : matches) {
    pa.emplace_back(first.keypoints[i].position.x(), first.keypoints[i].position.y());
    pb.emplace_back(second.keypoints[j].position.x(), second.keypoints[j].position.y());
  }
  const cv::Mat camera = (cv::Mat_<double>(3, 3) << K.fx, 0, K.cx, 0, K.fy, K.cy, 0, 0, 1);
  cv::Mat mask;
  cv::setRNGSeed(0);
  const cv::Mat E = cv::findEssentialMat(pa, pb, camera, cv::RANSAC, 0.999, options.ransac_threshold, mask);
  if (E.rows != 3 || E.cols != 3) return std::nullopt;
  cv::Mat R_cv, t_cv;
  if (cv::recoverPose(E, pa, pb, camera, R_cv, t_cv, mask) < options.min_points) return std::nullopt;
  geometry::Matrix3 R;
  Vector3 t;
  cv::cv2eigen(R_cv, R);
  cv::cv2eigen(t_cv, t);
  const SE3Pose pose_a;
  SE3Pose pose_b(R, t);

  const double sa = first.pyramid ? first.pyramid->scale_factor() : 1.0;
  const double sb = second.pyramid ? second.pyramid->scale_factor() : 1.0;
  TwoViewResult result;
  std::vector<double> parallax, depth;
  for (size_t k = 0; k < matches.size(); ++k) {
    if (!mask.at<std::uint8_t>(static_cast<int>(k))) continue;
    const auto [i, j] = matches[k];
    const features::Keypoint& ka = first.keypoints[i];
    const features::Keypoint& kb = second.keypoints[j];
    Vector3 X;
    try {
      X = geometry::triangulate(pose_a, pose_b, K, ka.position, kb.position).position;
    } catch (const Error&) {
      continue;
    }
    const Vector3 xb = pose_b * X;
    if (X.z() <= 0.0 || xb.z() <= 0.0) continue;
    const double ea = (geometry::project_unchecked(K, X) - ka.position).squaredNorm() / std::pow(sa, 2 * ka.octave);
    const double eb = (geometry::project_unchecked(K, xb) - kb.position).squaredNorm() / std::pow(sb, 2 * kb.octave);
    if (ea > options.chi2_threshold || eb > options.chi2_threshold) continue;
    result.matches.emplace_back(i, j);
    result.points.push_back(X);
    parallax.push_back(geometry::ray_parallax_deg(pose_a, pose_b, K, ka.position, kb.position));
    depth.push_back(X.z());
  }
  if (static_cast<int>(result.points.size()) < options.min_points) return std::nullopt;
  result.median_parallax_deg = median(parallax);
  if (result.median_parallax_deg < options.min_median_parallax_deg) return std::nullopt;

  const double scale = 1.0 / median(depth);
  for (Vector3& X : result.points) X *= scale;
  result.pose_second = SE3Pose(pose_b.rotation(), pose_b.translation() * scale);
  return result;
}

}  // namespace kpslam::tracking
