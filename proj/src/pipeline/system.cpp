#include "kpslam/pipeline/system.h"

#include <fstream>
#include <optional>

#include "kpslam/common/error.h"
#include "kpslam/geometry/pose_format.h"
#include "kpslam/loop/loop_corrector.h"
#include "kpslam/loop/loop_detector.h"
#include "kpslam/map/map_dump.h"
#include "kpslam/mapping/local_mapping.h"
#include "kpslam/sim/trajectory.h"

namespace kpslam::pipeline {

namespace fs = std::filesystem;
using geometry::SE3Pose;

Trajectory RunResult::online_trajectory() const {
  Trajectory out;
  for (const FrameRecord& f : frames) {
    if (f.has_pose) out.push_back({f.timestamp, f.pose.inverse()});
  }
  return out;
}

Trajectory RunResult::final_trajectory() const {
  Trajectory out;
  for (const FrameRecord& f : frames) {
    if (!f.has_pose) continue;
    const SE3Pose pose = map.has_keyframe(f.reference_kf) ? f.relative * map.keyframe(f.reference_kf).pose : f.pose;
    out.push_back({f.timestamp, pose.inverse()});
  }
  return out;
}

int RunResult::n_lost() const {
  int n = 0;
  for (const FrameRecord& f : frames) n += f.status == tracking::TrackingStatus::kLost ? 1 : 0;
  return n;
}

namespace {

class System {
 public:
  System(const SequenceSource& source, const SystemConfig& config)
      : config_(config), K_(source.camera), vocab_(config.join_threshold), detector_(config.loop) {
    config_.correction.fusion = config_.mapping;
  }

  FrameRecord process(map::Frame frame) {
    FrameRecord rec;
    rec.id = frame.id;
    rec.timestamp = frame.timestamp;
    if (!initialized_) {
      initialize(frame, rec);
      return rec;
    }
    state_ = tracking::track_frame(state_, frame, result_.map, K_, config_.tracking);
    rec.status = state_.status;
    if (state_.status != tracking::TrackingStatus::kOk) return rec;
    count_visibility(frame);
    rec.has_pose = true;
    rec.pose = frame.pose;
    rec.tracked = state_.tracked;
    rec.reference_kf = state_.reference_kf;
    rec.relative = frame.pose * result_.map.keyframe(state_.reference_kf).pose.inverse();
    if (tracking::need_keyframe(state_, result_.map, config_.tracking)) {
      const mapping::LocalMappingReport report = mapping::process_keyframe(result_.map, frame, K_, config_.mapping);
      rec.keyframe = true;
      rec.reference_kf = report.keyframe;
      rec.relative = SE3Pose();
      close_loops(report.keyframe, frame.id);
      adopt_keyframe(report.keyframe);
    }
    return rec;
  }

  RunResult& result() { return result_; }
  // Frames before initialization that became the first keyframe get their pose late.
  std::optional<std::uint64_t> take_bootstrapped_frame() {
    auto out = bootstrapped_frame_;
    bootstrapped_frame_.reset();
    return out;
  }

 private:
  void initialize(map::Frame& frame, FrameRecord& rec) {
    rec.status = tracking::TrackingStatus::kInitializing;
    if (static_cast<int>(frame.size()) < config_.init.min_matches) return;
    if (!init_ref_) {
      init_ref_ = std::move(frame);
      return;
    }
    const auto two_view = tracking::initialize_two_view(*init_ref_, frame, K_, config_.init);
    if (!two_view) {
      if (static_cast<int>(frame.id - init_ref_->id) >= config_.init_max_frames) init_ref_ = std::move(frame);
      return;
    }
    map::GlobalMap& map = result_.map;
    map::Frame first = *init_ref_;
    first.pose = SE3Pose();
    first.map_point_links.assign(first.size(), map::kNone);
    frame.pose = two_view->pose_second;
    frame.map_point_links.assign(frame.size(), map::kNone);
    for (size_t m = 0; m < two_view->matches.size(); ++m) {
      const map::MapPointId p = map.add_point(two_view->points[m]);
      first.map_point_links[two_view->matches[m].first] = p;
      frame.map_point_links[two_view->matches[m].second] = p;
    }
    const map::KeyFrameId kf0 = mapping::insert_keyframe(map, first);
    const map::KeyFrameId kf1 = mapping::insert_keyframe(map, frame);
    for (const auto& [id, point] : map.points()) map.update_descriptor(id);
    try {
      mapping::global_bundle_adjust(map, K_, config_.mapping.ba);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kIllPosedProblem) throw;
    }
    initialized_ = true;
    bootstrapped_frame_ = first.id;

    const std::uint64_t gap = frame.id - first.id;
    const SE3Pose motion = map.keyframe(kf1).pose * map.keyframe(kf0).pose.inverse();
    state_ = tracking::TrackingState();
    state_.status = tracking::TrackingStatus::kOk;
    state_.velocity = gap == 1 ? motion : geometry::se3_exp(geometry::se3_log(motion) / static_cast<double>(gap));
    state_.has_velocity = true;
    close_loops(kf0, first.id);
    close_loops(kf1, frame.id);
    adopt_keyframe(kf1);

    rec.status = tracking::TrackingStatus::kOk;
    rec.has_pose = true;
    rec.pose = map.keyframe(kf1).pose;
    rec.keyframe = true;
    rec.reference_kf = kf1;
    rec.tracked = static_cast<int>(two_view->matches.size());
  }

  // Tracking statistics used by map point culling.
  void count_visibility(const map::Frame& frame) {
    map::GlobalMap& map = result_.map;
    for (map::MapPointId id : state_.projected_points) {
      const map::MapPointId p = map.resolve(id);
      if (p != map::kNone) ++map.point(p).visible;
    }
    for (map::MapPointId id : frame.map_point_links) {
      const map::MapPointId p = map.resolve(id);
      if (p != map::kNone) ++map.point(p).found;
    }
  }

  // The keyframe becomes the tracking reference and the last frame, so the
  // next frame is matched against its refined pose and current links.
  void adopt_keyframe(map::KeyFrameId kf) {
    const map::GlobalMap& map = result_.map;
    map::Frame last = map.keyframe(kf);
    for (map::MapPointId& id : last.map_point_links) id = map.resolve(id);
    state_.last = std::move(last);
    state_.reference_kf = kf;
    state_.frames_since_keyframe = 0;
    state_.tracked = state_.last.n_linked();
  }

  void close_loops(map::KeyFrameId kf, std::uint64_t frame_id) {
    if (!config_.loop_enabled) return;
    vocab_.add(result_.map, kf);
    const auto candidate = detector_.detect(result_.map, vocab_, kf, K_);
    if (!candidate) return;
    result_.loop_log.push_back(loop::loop_log_line(*candidate));
    if (candidate->verdict != loop::LoopVerdict::kAccepted) return;
    ++result_.loops_accepted;
    const loop::CorrectionReport report = loop::correct_loop(result_.map, *candidate, K_, config_.correction);
    if (!report.applied) return;
    if (result_.loops_applied++ == 0) {
      result_.first_loop_kf = kf;
      result_.first_loop_frame = frame_id;
    }
    detector_.reset();
  }

  SystemConfig config_;
  geometry::CameraIntrinsics K_;
  loop::Vocabulary vocab_;
  loop::LoopDetector detector_;
  RunResult result_;
  tracking::TrackingState state_;
  bool initialized_ = false;
  std::optional<map::Frame> init_ref_;
  std::optional<std::uint64_t> bootstrapped_frame_;
};

}  // namespace

RunResult run_sequence(const SequenceSource& source, const SystemConfig& config, const FrameCallback& on_frame) {
  FrameReader reader(source, config.features);
  System system(source, config);
  std::vector<FrameRecord>& frames = system.result().frames;
  for (int k = 0; k < reader.size(); ++k) {
    frames.push_back(system.process(reader.make_frame(reader.read(k))));
    if (const auto first = system.take_bootstrapped_frame()) {
      for (FrameRecord& f : frames) {
        if (f.id != *first) continue;
        f.status = tracking::TrackingStatus::kOk;
        f.has_pose = true;
        f.keyframe = true;
        f.reference_kf = system.result().map.first_keyframe_id();
        f.pose = system.result().map.keyframe(f.reference_kf).pose;
        f.tracked = frames.back().tracked;
      }
    }
    if (on_frame) on_frame(frames.back());
  }
  return std::move(system.result());
}

std::optional<Trajectory> source_ground_truth(const SequenceSource& source) {
  if (source.synthetic) {
    const std::vector<SE3Pose> poses = sim::gen_trajectory(source.synthetic->trajectory);
    Trajectory gt;
    for (size_t k = 0; k < poses.size(); ++k) gt.push_back({source.timestamps[k], poses[k].inverse()});
    return gt;
  }
  if (source.ground_truth) return read_trajectory(*source.ground_truth, source.timestamps);
  return std::nullopt;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
  return out;
}

}  // namespace

void write_run(const fs::path& dir, const RunResult& result, const SequenceSource& source,
               const SystemConfig& config) {
  fs::create_directories(dir);
  write_trajectory(dir / "trajectory.txt", result.final_trajectory(), TrajectoryFormat::kTum);
  write_trajectory(dir / "trajectory_online.txt", result.online_trajectory(), TrajectoryFormat::kTum);
  write_trajectory(dir / "trajectory_kitti.txt", result.final_trajectory(), TrajectoryFormat::kKitti);
  {
    auto out = open_out(dir / "frames.txt");
    for (const FrameRecord& f : result.frames) {
      out << f.id << ' ' << geometry::format_number(f.timestamp) << ' ' << tracking::status_name(f.status) << ' '
          << f.has_pose << ' ' << f.keyframe << ' ' << f.tracked << '\n';
    }
  }
  {
    auto out = open_out(dir / "keyframes.txt");
    for (const auto& [id, kf] : result.map.keyframes()) {
      out << id << ' ' << kf.id << ' ' << geometry::format_number(kf.timestamp) << '\n';
    }
  }
  {
    auto out = open_out(dir / "loops.txt");
    for (const std::string& line : result.loop_log) out << line << '\n';
  }
  map::write_map_dump(dir / "map.txt", result.map);
  {
    auto out = open_out(dir / "config.txt");
    out << config_to_text(config);
  }
  if (const auto gt = source_ground_truth(source)) write_trajectory(dir / "groundtruth.txt", *gt, TrajectoryFormat::kTum);
}

}  // namespace kpslam::pipeline
