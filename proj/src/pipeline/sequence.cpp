#include "kpslam/pipeline/sequence.h"

#include <algorithm>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <sstream>

#include "kpslam/common/error.h"

namespace kpslam::pipeline {

namespace fs = std::filesystem;

void SequenceSource::validate() const {
  if (!synthetic && images.size() != timestamps.size()) {
    throw Error(ErrorCode::kInvalidArgument, "image count " + std::to_string(images.size()) +
                                                 " differs from timestamp count " +
                                                 std::to_string(timestamps.size()));
  }
  if (synthetic && synthetic->trajectory.n_frames != size()) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic frame count differs from timestamp count");
  }
  camera.validate();
}

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> read_times(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double t;
    if (!(ls >> t)) throw Error(ErrorCode::kMalformedFile, "bad timestamp line in " + p.string());
    out.push_back(t);
  }
  return out;
}

geometry::CameraIntrinsics read_calib(const fs::path& p, const std::vector<fs::path>& images) {
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    geometry::CameraIntrinsics K;
    if (first == "P0:") {
      double P[12];
      for (double& v : P) {
        if (!(ls >> v)) throw Error(ErrorCode::kMalformedFile, "bad P0 row in " + p.string());
      }
      K.fx = P[0];
      K.cx = P[2];
      K.fy = P[5];
      K.cy = P[6];
      if (images.empty()) throw Error(ErrorCode::kInvalidArgument, "no images to size the camera");
      const features::GrayImage img = load_gray_image(images.front());
      K.width = img.width();
      K.height = img.height();
      return K;
    }
    std::istringstream all(line);
    if (!(all >> K.fx >> K.fy >> K.cx >> K.cy >> K.width >> K.height)) {
      throw Error(ErrorCode::kMalformedFile, "calib line must be 'fx fy cx cy width height' in " + p.string());
    }
    return K;
  }
  throw Error(ErrorCode::kMalformedFile, "no intrinsics in " + p.string());
}

}  // namespace

features::GrayImage load_gray_image(const fs::path& path) {
  const cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw Error(ErrorCode::kIoError, "cannot read image " + path.string());
  features::GrayImage out(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) out.at(x, y) = img.at<std::uint8_t>(y, x);
  }
  return out;
}

SequenceSource image_source(const fs::path& dir, const std::optional<fs::path>& sidecar) {
  SequenceSource src;
  fs::path image_dir;
  for (const char* name : {"images", "image_0"}) {
    if (fs::is_directory(dir / name)) {
      image_dir = dir / name;
      break;
    }
  }
  if (image_dir.empty()) throw Error(ErrorCode::kIoError, "no images/ or image_0/ in " + dir.string());
  for (const auto& entry : fs::directory_iterator(image_dir)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".pgm")) {
      src.images.push_back(entry.path());
    }
  }
  std::sort(src.images.begin(), src.images.end());
  src.timestamps = read_times(dir / "times.txt");
  src.camera = read_calib(dir / "calib.txt", src.images);
  src.sidecar = sidecar;
  for (const char* name : {"groundtruth.txt", "poses.txt"}) {
    if (fs::exists(dir / name)) {
      src.ground_truth = dir / name;
      break;
    }
  }
  src.validate();
  return src;
}

SequenceSource synthetic_source(const sim::SequenceSpec& spec) {
  SequenceSource src;
  src.synthetic = spec;
  src.camera = spec.camera;
  for (int k = 0; k < spec.trajectory.n_frames; ++k) src.timestamps.push_back(k * spec.frame_interval);
  src.validate();
  return src;
}

namespace {

FieldTable spec_fields(sim::SequenceSpec& s) {
  FieldTable t;
  t.emplace_back("n_frames", &s.trajectory.n_frames);
  t.emplace_back("seed", &s.seed);
  t.emplace_back("radius", &s.trajectory.radius);
  t.emplace_back("laps", &s.trajectory.laps);
  t.emplace_back("squareness", &s.trajectory.squareness);
  t.emplace_back("speed", &s.trajectory.speed);
  t.emplace_back("yaw_amplitude_deg", &s.trajectory.yaw_amplitude_deg);
  t.emplace_back("yaw_period", &s.trajectory.yaw_period);
  t.emplace_back("n_landmarks", &s.n_landmarks);
  t.emplace_back("frame_interval", &s.frame_interval);
  t.emplace_back("intensity_noise", &s.intensity_noise);
  t.emplace_back("keypoint_jitter", &s.keypoint_jitter);
  t.emplace_back("descriptor_noise", &s.descriptor_noise);
  t.emplace_back("splat_size", &s.splat_size);
  t.emplace_back("descriptor_dim", &s.descriptor_dim);
  t.emplace_back("fx", &s.camera.fx);
  t.emplace_back("fy", &s.camera.fy);
  t.emplace_back("cx", &s.camera.cx);
  t.emplace_back("cy", &s.camera.cy);
  t.emplace_back("width", &s.camera.width);
  t.emplace_back("height", &s.camera.height);
  return t;
}

}  // namespace

sim::SequenceSpec parse_sequence_spec(const std::string& text, const std::string& origin) {
  const auto kv = parse_key_values(text, origin);
  std::string kind = "circle";
  int n_frames = 100;
  for (const auto& [k, v] : kv) {
    if (k == "kind") kind = v;
    if (k == "n_frames") {
      sim::SequenceSpec probe;
      FieldTable t = spec_fields(probe);
      set_field(t, k, v);
      n_frames = probe.trajectory.n_frames;
    }
  }
  sim::SequenceSpec spec = sim::default_sequence_spec(sim::trajectory_kind_from_string(kind), n_frames);
  FieldTable fields = spec_fields(spec);
  for (const auto& [k, v] : kv) {
    if (k != "kind") set_field(fields, k, v);
  }
  if (spec.trajectory.n_frames < 1) throw Error(ErrorCode::kConfigError, "n_frames must be positive");
  return spec;
}

sim::SequenceSpec sequence_spec_from_argument(const std::string& argument) {
  if (fs::is_regular_file(argument)) return parse_sequence_spec(read_text(argument), argument);
  const auto colon = argument.find(':');
  std::string text = "kind=" + argument.substr(0, colon) + "\n";
  if (colon != std::string::npos) text += "n_frames=" + argument.substr(colon + 1) + "\n";
  return parse_sequence_spec(text, argument);
}

std::string sequence_spec_to_text(const sim::SequenceSpec& spec) {
  sim::SequenceSpec copy = spec;
  std::string out = "kind=" + sim::to_string(spec.trajectory.kind) + "\n";
  for (const auto& [key, ref] : spec_fields(copy)) out += key + "=" + format_field(ref) + "\n";
  return out;
}

FrameReader::FrameReader(const SequenceSource& source, const FeatureConfig& features)
    : source_(source), features_(features) {
  source_.validate();
  if (source_.sidecar) sidecar_ = features::load_sidecar(*source_.sidecar);
  if (source_.synthetic) synthetic_ = std::make_unique<sim::SyntheticSequence>(*source_.synthetic);
}

InputFrame FrameReader::read(int k) const {
  InputFrame in;
  in.id = static_cast<std::uint64_t>(k);
  in.timestamp = source_.timestamps.at(k);
  std::optional<sim::RenderedFrame> rendered;
  if (synthetic_) {
    rendered = synthetic_->render(k);
    in.image = rendered->image;
  } else {
    in.image = load_gray_image(source_.images.at(k));
  }
  if (sidecar_) {
    const auto it = sidecar_->frames.find(in.id);
    if (it != sidecar_->frames.end()) in.features = it->second;
  } else if (synthetic_) {
    in.features = synthetic_->features(k, *rendered).features;
  } else {
    const features::ImagePyramid pyramid =
        features::build_pyramid(in.image, features_.pyramid_levels, features_.scale_factor);
    in.features = features::detect_fallback(pyramid, features_.total_keypoints, features_.fallback);
  }
  return in;
}

map::Frame FrameReader::make_frame(const InputFrame& input) const {
  auto pyramid = std::make_shared<const features::ImagePyramid>(
      features::build_pyramid(input.image, features_.pyramid_levels, features_.scale_factor));
  return map::make_frame(input.id, input.timestamp, std::move(pyramid), input.features, source_.camera.width,
                         source_.camera.height);
}

}  // namespace kpslam::pipeline
