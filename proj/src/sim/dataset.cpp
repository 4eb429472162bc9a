#include "kpslam/sim/dataset.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "kpslam/common/error.h"
#include "kpslam/geometry/pose_format.h"
#include "kpslam/sim/rng.h"

namespace kpslam::sim {

using geometry::Vector3;

SequenceSpec default_sequence_spec(TrajectoryKind kind, int n_frames, std::uint64_t seed) {
  SequenceSpec spec;
  spec.seed = seed;
  spec.trajectory.kind = kind;
  spec.trajectory.n_frames = n_frames;
  switch (kind) {
    case TrajectoryKind::kCircle:
      spec.trajectory.radius = 4.0;
      spec.n_landmarks = 1500;
      spec.bounds.volume = {Vector3(-2.0, -1.5, -2.0), Vector3(2.0, 1.5, 2.0)};
      break;
    case TrajectoryKind::kSquareLoop:
      // walls of a room around the loop, viewed from inside
      spec.trajectory.radius = 3.0;
      spec.n_landmarks = 6000;
      spec.bounds.volume = {Vector3(-9.0, -2.0, -9.0), Vector3(9.0, 2.0, 9.0)};
      spec.bounds.hollow = Box{Vector3(-6.0, -3.0, -6.0), Vector3(6.0, 3.0, 6.0)};
      break;
    case TrajectoryKind::kStraight:
    case TrajectoryKind::kFastRotation:
      spec.n_landmarks = 4000;
      spec.bounds.volume = {Vector3(-10.0, -2.5, 4.0), Vector3(10.0 + 0.05 * n_frames, 2.5, 9.0)};
      break;
  }
  return spec;
}

SyntheticSequence::SyntheticSequence(SequenceSpec spec)
    : spec_(std::move(spec)),
      world_(gen_world(spec_.seed, spec_.n_landmarks, spec_.bounds, spec_.descriptor_dim)),
      poses_(gen_trajectory(spec_.trajectory)) {
  spec_.camera.validate();
}

RenderedFrame SyntheticSequence::render(int k) const {
  RenderOptions options;
  options.noise_sigma = spec_.intensity_noise;
  options.noise_seed = mix_seed(spec_.seed, 0x72656e64ull, static_cast<std::uint64_t>(k));
  options.splat_size = spec_.splat_size;
  return render_frame(world_, poses_.at(k), spec_.camera, options);
}

SyntheticFeatures SyntheticSequence::features(int k) const {
  RenderOptions options;
  options.splat_size = spec_.splat_size;
  // occlusion only depends on geometry, so a noise-free render is sufficient
  return features(k, render_frame(world_, poses_.at(k), spec_.camera, options));
}

SyntheticFeatures SyntheticSequence::features(int k, const RenderedFrame& rendered) const {
  SyntheticFeatures out;
  const geometry::CameraIntrinsics& K = spec_.camera;
  for (const Correspondence& c : rendered.correspondences) {
    if (c.occluded) continue;
    Rng rng(mix_seed(spec_.seed, static_cast<std::uint64_t>(k) + 1, static_cast<std::uint64_t>(c.landmark_id) + 1));
    features::Keypoint kp;
    kp.position = c.pixel;
    if (spec_.keypoint_jitter > 0.0) {
      kp.position += geometry::Vector2(rng.normal(0.0, spec_.keypoint_jitter), rng.normal(0.0, spec_.keypoint_jitter));
    }
    if (!K.in_image(kp.position)) continue;
    kp.octave = 0;
    kp.score = 1.0 / (1.0 + c.depth);
    features::FloatDescriptor d = world_.landmarks[c.landmark_id].descriptor;
    if (spec_.descriptor_noise > 0.0) {
      for (float& v : d.values) v = static_cast<float>(v + rng.normal(0.0, spec_.descriptor_noise));
      d.normalize();
    }
    out.features.keypoints.push_back(kp);
    out.features.descriptors.push_back(std::move(d));
    out.landmark_ids.push_back(c.landmark_id);
  }
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
  return out;
}

}  // namespace

void export_sequence(const SyntheticSequence& seq, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  features::SidecarFile sidecar;
  sidecar.descriptor_dim = seq.spec().descriptor_dim;
  sidecar.normalized = true;
  auto times = open_out(dir / "times.txt");
  auto tum = open_out(dir / "groundtruth.txt");
  auto kitti = open_out(dir / "poses.txt");
  times << std::fixed << std::setprecision(6);
  for (int k = 0; k < seq.size(); ++k) {
    const RenderedFrame frame = seq.render(k);
    cv::Mat img(frame.image.height(), frame.image.width(), CV_8UC1);
    for (int y = 0; y < img.rows; ++y) {
      for (int x = 0; x < img.cols; ++x) {
        img.at<std::uint8_t>(y, x) = cv::saturate_cast<std::uint8_t>(std::lround(frame.image.at(x, y)));
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", k);
    if (!cv::imwrite((dir / "images" / name).string(), img)) {
      throw Error(ErrorCode::kIoError, "cannot write image " + std::string(name));
    }
    sidecar.frames[static_cast<std::uint64_t>(k)] = seq.features(k, frame).features;
    times << seq.timestamp(k) << '\n';
    const geometry::SE3Pose twc = seq.poses()[k].inverse();
    tum << geometry::format_tum_pose(seq.timestamp(k), twc) << '\n';
    kitti << geometry::format_kitti_pose(twc) << '\n';
  }
  const geometry::CameraIntrinsics& K = seq.camera();
  auto calib = open_out(dir / "calib.txt");
  calib << std::setprecision(17) << K.fx << ' ' << K.fy << ' ' << K.cx << ' ' << K.cy << ' '
        << K.width << ' ' << K.height << '\n';
  features::write_sidecar(dir / "features.dkkp", sidecar);
}

}  // namespace kpslam::sim
