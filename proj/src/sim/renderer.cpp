#include "kpslam/sim/renderer.h"

#include <algorithm>
#include <cmath>

#include "kpslam/sim/rng.h"

namespace kpslam::sim {

using geometry::Vector2;
using geometry::Vector3;

std::vector<Correspondence> visible_landmarks(const SyntheticWorld& world,
                                              const geometry::SE3Pose& pose,
                                              const geometry::CameraIntrinsics& K,
                                              double near_plane) {
  std::vector<Correspondence> out;
  for (const SyntheticLandmark& lm : world.landmarks) {
    const Vector3 pc = pose.apply(lm.position);
    if (pc.z() <= near_plane) continue;
    const Vector2 px = geometry::project_unchecked(K, pc);
    if (!K.in_image(px)) continue;
    out.push_back({lm.id, px, pc.z(), false});
  }
  return out;
}

RenderedFrame render_frame(const SyntheticWorld& world, const geometry::SE3Pose& pose,
                           const geometry::CameraIntrinsics& K, const RenderOptions& options) {
  RenderedFrame out;
  const int w = K.width;
  const int h = K.height;
  out.image = features::GrayImage(w, h);
  const geometry::Matrix3 r_wc = pose.rotation_matrix().transpose();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vector3 d = (r_wc * geometry::pixel_ray(K, Vector2(x, y))).normalized();
      const double bg = 128.0 + 4.0 * std::sin(5.0 * d.x() + 1.0) * std::cos(4.0 * d.y()) +
                        3.0 * std::sin(6.0 * d.z());
      out.image.at(x, y) = bg;
    }
  }

  std::vector<Correspondence> visible;
  const double half = options.splat_size / 2.0;
  for (const SyntheticLandmark& lm : world.landmarks) {
    const Vector3 pc = pose.apply(lm.position);
    if (pc.z() <= options.near_plane) continue;
    const Vector2 px = geometry::project_unchecked(K, pc);
    if (px.x() < -half || px.y() < -half || px.x() > w - 1 + half || px.y() > h - 1 + half) continue;
    visible.push_back({lm.id, px, pc.z(), false});
  }
  // painter's order: far to near, ties by id
  std::sort(visible.begin(), visible.end(), [](const Correspondence& a, const Correspondence& b) {
    return a.depth != b.depth ? a.depth > b.depth : a.landmark_id < b.landmark_id;
  });
  std::vector<int> owner(static_cast<size_t>(w) * h, -1);
  for (const Correspondence& c : visible) {
    const SplatTexture& tex = world.landmarks[c.landmark_id].texture;
    const int x0 = std::max(0, static_cast<int>(std::ceil(c.pixel.x() - half)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(c.pixel.x() + half)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(c.pixel.y() - half)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(c.pixel.y() + half)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        out.image.at(x, y) = tex(x - c.pixel.x(), y - c.pixel.y());
        owner[static_cast<size_t>(y) * w + x] = c.landmark_id;
      }
    }
  }
  for (Correspondence& c : visible) {
    if (!K.in_image(c.pixel)) continue;
    const int x = static_cast<int>(std::lround(c.pixel.x()));
    const int y = static_cast<int>(std::lround(c.pixel.y()));
    c.occluded = owner[static_cast<size_t>(y) * w + x] != c.landmark_id;
    out.correspondences.push_back(c);
  }
  std::sort(out.correspondences.begin(), out.correspondences.end(),
            [](const Correspondence& a, const Correspondence& b) { return a.landmark_id < b.landmark_id; });

  if (options.noise_sigma > 0.0) {
    Rng rng(mix_seed(options.noise_seed, 0x6e6f697365ull));
    for (double& p : out.image.pixels()) p += rng.normal(0.0, options.noise_sigma);
  }
  return out;
}

}  // namespace kpslam::sim
