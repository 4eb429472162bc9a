#include "kpslam/pipeline/trajectory_io.h"

#include <fstream>
#include <sstream>

#include "kpslam/common/error.h"
#include "kpslam/geometry/pose_format.h"

namespace kpslam::pipeline {

TrajectoryFormat trajectory_format_from_string(const std::string& name) {
  if (name == "tum") return TrajectoryFormat::kTum;
  if (name == "kitti") return TrajectoryFormat::kKitti;
  throw Error(ErrorCode::kConfigError, "unknown trajectory format '" + name + "'");
}

void write_trajectory(std::ostream& out, const Trajectory& traj, TrajectoryFormat format) {
  for (const StampedPose& p : traj) {
    out << (format == TrajectoryFormat::kTum ? geometry::format_tum_pose(p.timestamp, p.camera_to_world)
                                             : geometry::format_kitti_pose(p.camera_to_world))
        << '\n';
  }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, TrajectoryFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_trajectory(out, traj, format);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Trajectory read_trajectory(std::istream& in, const std::string& origin, const std::vector<double>& kitti_times,
                           double kitti_interval) {
  Trajectory out;
  std::string line;
  int n = 0;
  int row = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw Error(ErrorCode::kMalformedFile, origin + ":" + std::to_string(n) + ": not a number");
    StampedPose p;
    if (v.size() == 8) {
      Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
      if (q.norm() < 1e-6) throw Error(ErrorCode::kMalformedFile, origin + ":" + std::to_string(n) + ": zero quaternion");
      p.timestamp = v[0];
      p.camera_to_world = geometry::SE3Pose(q.normalized(), geometry::Vector3(v[1], v[2], v[3]));
    } else if (v.size() == 12) {
      geometry::Matrix3 R;
      R << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
      p.timestamp = row < static_cast<int>(kitti_times.size()) ? kitti_times[row] : row * kitti_interval;
      p.camera_to_world = geometry::SE3Pose(R, geometry::Vector3(v[3], v[7], v[11]));
    } else {
      throw Error(ErrorCode::kMalformedFile,
                  origin + ":" + std::to_string(n) + ": expected 8 (TUM) or 12 (KITTI) columns");
    }
    ++row;
    out.push_back(p);
  }
  return out;
}

Trajectory read_trajectory(const std::filesystem::path& path, const std::vector<double>& kitti_times,
                           double kitti_interval) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return read_trajectory(in, path.string(), kitti_times, kitti_interval);
}

}  // namespace kpslam::pipeline
