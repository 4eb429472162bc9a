#include "kpslam/pipeline/plots.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kpslam/common/error.h"
#include "kpslam/geometry/pose_format.h"

namespace kpslam::pipeline {

namespace fs = std::filesystem;
using geometry::format_number;

void write_trajectory_overlay(std::ostream& out, const Trajectory& est, const Trajectory& gt, bool with_scale,
                              double max_dt) {
  const EvalResult ate = eval_ate(est, gt, with_scale, max_dt);
  out << "timestamp gt_x gt_y gt_z est_x est_y est_z\n";
  for (const auto& [i, j] : associate(est, gt, max_dt)) {
    const geometry::Vector3 g = gt[j].camera_to_world.translation();
    const geometry::Vector3 e = ate.alignment.apply(est[i].camera_to_world.translation());
    out << format_number(est[i].timestamp);
    for (double v : {g.x(), g.y(), g.z(), e.x(), e.y(), e.z()}) out << ' ' << format_number(v);
    out << '\n';
  }
}

std::vector<PrPoint> pr_sweep(const std::vector<LoopDetection>& detections, int n_positive_queries) {
  std::set<double> thresholds;
  for (const LoopDetection& d : detections) thresholds.insert(d.score);
  std::vector<PrPoint> curve;
  for (double t : thresholds) {
    int reported = 0, correct = 0;
    std::set<map::KeyFrameId> found;
    for (const LoopDetection& d : detections) {
      if (d.score < t) continue;
      ++reported;
      if (d.correct) {
        ++correct;
        found.insert(d.query);
      }
    }
    PrPoint p;
    p.threshold = t;
    p.precision = reported ? static_cast<double>(correct) / reported : 1.0;
    p.recall = n_positive_queries > 0
                   ? std::min(1.0, static_cast<double>(found.size()) / n_positive_queries)
                   : 0.0;
    curve.push_back(p);
  }
  return curve;
}

double recall_at_full_precision(const std::vector<PrPoint>& curve) {
  double best = 0.0;
  for (const PrPoint& p : curve) {
    if (p.precision == 1.0) best = std::max(best, p.recall);
  }
  return best;
}

void write_pr_curve(std::ostream& out, const std::vector<PrPoint>& curve) {
  out << "threshold precision recall\n";
  for (const PrPoint& p : curve) {
    out << format_number(p.threshold) << ' ' << format_number(p.precision) << ' ' << format_number(p.recall)
        << '\n';
  }
}

std::vector<LoopLogRecord> read_loop_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<LoopLogRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    LoopLogRecord r;
    if (!(ls >> r.kf >> r.candidate >> r.score >> r.n_gms >> r.n_inliers >> r.verdict)) {
      throw Error(ErrorCode::kMalformedFile, path.string() + ":" + std::to_string(n) + ": bad loop log line");
    }
    out.push_back(r);
  }
  return out;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
  return out;
}

// keyframe id -> timestamp, from `kf_id frame_id timestamp` lines
std::map<map::KeyFrameId, double> read_keyframe_times(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::map<map::KeyFrameId, double> out;
  map::KeyFrameId kf;
  std::uint64_t frame;
  double t;
  while (in >> kf >> frame >> t) out[kf] = t;
  return out;
}

const StampedPose* nearest(const Trajectory& gt, double t) {
  const StampedPose* best = nullptr;
  for (const StampedPose& p : gt) {
    if (std::abs(p.timestamp - t) > kDefaultMaxTimeDifference) continue;
    if (!best || std::abs(p.timestamp - t) < std::abs(best->timestamp - t)) best = &p;
  }
  return best;
}

}  // namespace

std::vector<fs::path> emit_plots(const fs::path& run_dir, const RunPlotOptions& options) {
  std::vector<fs::path> written;
  const fs::path gt_path = run_dir / "groundtruth.txt";
  const bool has_gt = fs::exists(gt_path);
  Trajectory gt;
  if (has_gt) gt = read_trajectory(gt_path);

  if (has_gt) {
    const Trajectory est = read_trajectory(run_dir / "trajectory.txt");
    auto out = open_out(run_dir / "trajectory_xyz.txt");
    write_trajectory_overlay(out, est, gt, options.with_scale);
    written.push_back(run_dir / "trajectory_xyz.txt");
  }

  std::vector<LoopDetection> detections;
  int positives = 0;
  const std::vector<LoopLogRecord> log =
      fs::exists(run_dir / "loops.txt") ? read_loop_log(run_dir / "loops.txt") : std::vector<LoopLogRecord>{};
  if (has_gt) {
    const auto times = read_keyframe_times(run_dir / "keyframes.txt");
    std::map<map::KeyFrameId, geometry::SE3Pose> truth;
    for (const auto& [kf, t] : times) {
      if (const StampedPose* p = nearest(gt, t)) truth[kf] = p->camera_to_world;
    }
    const double cos_max = std::cos(options.loop_max_angle_deg * M_PI / 180.0);
    auto true_loop = [&](map::KeyFrameId a, map::KeyFrameId b) {
      if (!truth.count(a) || !truth.count(b)) return false;
      const geometry::SE3Pose& pa = truth.at(a);
      const geometry::SE3Pose& pb = truth.at(b);
      const geometry::Vector3 za = pa.rotation() * geometry::Vector3::UnitZ();
      const geometry::Vector3 zb = pb.rotation() * geometry::Vector3::UnitZ();
      return (pa.translation() - pb.translation()).norm() <= options.loop_radius && za.dot(zb) >= cos_max;
    };
    for (const auto& [q, tq] : truth) {
      for (const auto& [c, tc] : truth) {
        if (c >= q - options.recent_exclusion) break;
        if (true_loop(q, c)) {
          ++positives;
          break;
        }
      }
    }
    for (const LoopLogRecord& r : log) detections.push_back({r.kf, r.candidate, r.score, true_loop(r.kf, r.candidate)});
  }
  auto out = open_out(run_dir / "pr.txt");
  write_pr_curve(out, pr_sweep(detections, positives));
  written.push_back(run_dir / "pr.txt");
  return written;
}

}  // namespace kpslam::pipeline
