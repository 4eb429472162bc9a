#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kpslam/features/descriptor.h"
#include "kpslam/geometry/se3.h"

namespace kpslam::sim {

struct Box {
  geometry::Vector3 min = geometry::Vector3::Constant(-1.0);
  geometry::Vector3 max = geometry::Vector3::Constant(1.0);

  bool contains(const geometry::Vector3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

struct WorldBounds {
  Box volume;
  std::optional<Box> hollow;  // landmarks are never placed inside this box
};

/// Texture of a landmark splat as a function of the pixel offset (dx, dy)
/// from its projection: base + gx dx + gy dy + gxy dx dy. Bilinear in the
/// offset, so bilinear image interpolation reproduces it exactly.
struct SplatTexture {
  double base = 128.0;
  double gx = 0.0;
  double gy = 0.0;
  double gxy = 0.0;

  double operator()(double dx, double dy) const { return base + gx * dx + gy * dy + gxy * dx * dy; }
};

struct SyntheticLandmark {
  int id = 0;
  geometry::Vector3 position = geometry::Vector3::Zero();
  SplatTexture texture;
  std::uint64_t texture_seed = 0;
  features::FloatDescriptor descriptor;  // unit norm
};

struct SyntheticWorld {
  std::uint64_t seed = 0;
  std::vector<SyntheticLandmark> landmarks;
};

/// Uniform landmarks in the bounds, each with a smooth random texture and a
/// random unit descriptor. Throws kInvalidArgument for n_landmarks <= 0.
SyntheticWorld gen_world(std::uint64_t seed, int n_landmarks, const WorldBounds& bounds,
                         int descriptor_dim = features::kDefaultDescriptorDim);

}  // namespace kpslam::sim
