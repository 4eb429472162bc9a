#pragma once

#include <filesystem>
#include <iosfwd>

#include "kpslam/map/global_map.h"

namespace kpslam::map {

/// Plain-text diagnostic dump. Keyframe lines `id timestamp tx ty tz qx qy qz qw`
/// (camera-to-world pose), then map point lines `id x y z n_obs`.
void write_map_dump(std::ostream& out, const GlobalMap& map);
void write_map_dump(const std::filesystem::path& path, const GlobalMap& map);

}  // namespace kpslam::map
