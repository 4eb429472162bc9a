#include "kpslam/sim/world.h"

#include "kpslam/common/error.h"
#include "kpslam/sim/rng.h"

namespace kpslam::sim {

SyntheticWorld gen_world(std::uint64_t seed, int n_landmarks, const WorldBounds& bounds,
                         int descriptor_dim) {
  if (n_landmarks <= 0) throw Error(ErrorCode::kInvalidArgument, "gen_world: n_landmarks must be > 0");
  if (descriptor_dim <= 0) throw Error(ErrorCode::kInvalidArgument, "gen_world: descriptor_dim must be > 0");
  if ((bounds.volume.max.array() < bounds.volume.min.array()).any()) {
    throw Error(ErrorCode::kInvalidArgument, "gen_world: empty volume");
  }
  SyntheticWorld world;
  world.seed = seed;
  Rng rng(mix_seed(seed, 0x776f726c64ull));
  const Box& v = bounds.volume;
  for (int i = 0; i < n_landmarks; ++i) {
    SyntheticLandmark lm;
    lm.id = i;
    for (int attempt = 0;; ++attempt) {
      for (int k = 0; k < 3; ++k) lm.position[k] = rng.uniform(v.min[k], v.max[k]);
      if (!bounds.hollow || !bounds.hollow->contains(lm.position)) break;
      if (attempt > 10000) throw Error(ErrorCode::kInvalidArgument, "gen_world: hollow covers the volume");
    }
    lm.texture_seed = rng.next();
    Rng tex(lm.texture_seed);
    // base intensity stays well away from the mid-gray background
    const double base = tex.uniform(80.0, 100.0);
    lm.texture.base = tex.uniform() < 0.5 ? base : 256.0 - base;
    // slopes strong enough to pin sub-pixel motion; over a 16 px splat the
    // texture stays inside [0, 255]
    auto slope = [&tex] { return (tex.uniform() < 0.5 ? -1.0 : 1.0) * tex.uniform(3.0, 4.5); };
    lm.texture.gx = slope();
    lm.texture.gy = slope();
    lm.texture.gxy = tex.uniform(-0.1, 0.1);
    lm.descriptor.values.resize(descriptor_dim);
    for (float& x : lm.descriptor.values) x = static_cast<float>(rng.normal());
    lm.descriptor.normalize();
    world.landmarks.push_back(std::move(lm));
  }
  return world;
}

}  // namespace kpslam::sim
