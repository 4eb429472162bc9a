#include "kpslam/map/map_dump.h"

#include <fstream>
#include <ostream>

#include "kpslam/common/error.h"
#include "kpslam/geometry/pose_format.h"

namespace kpslam::map {

void write_map_dump(std::ostream& out, const GlobalMap& map) {
  out << "# keyframes: id timestamp tx ty tz qx qy qz qw\n";
  for (const auto& [id, kf] : map.keyframes()) {
    out << id << ' ' << geometry::format_tum_pose(kf.timestamp, kf.pose.inverse()) << '\n';
  }
  out << "# map points: id x y z n_obs\n";
  for (const auto& [id, p] : map.points()) {
    out << id << ' ' << geometry::format_number(p.position.x()) << ' '
        << geometry::format_number(p.position.y()) << ' ' << geometry::format_number(p.position.z())
        << ' ' << p.observations.size() << '\n';
  }
}

void write_map_dump(const std::filesystem::path& path, const GlobalMap& map) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_map_dump(out, map);
}

}  // namespace kpslam::map
