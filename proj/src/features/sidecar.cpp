#include "kpslam/features/sidecar.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kpslam/common/error.h"

namespace kpslam::features {

namespace {

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  void need(size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw MalformedFileError(pos_, std::string("sidecar: truncated ") + what);
    }
  }

  std::uint64_t uint(int n, const char* what) {
    need(n, what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }

  float f32(const char* what) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(uint(4, what)));
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  size_t pos_ = 0;
};

void put(std::vector<std::uint8_t>& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put(out, std::bit_cast<std::uint32_t>(v), 4); }

}  // namespace

SidecarFile parse_sidecar(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  in.need(4, "magic");
  if (std::memcmp(bytes.data(), "DKKP", 4) != 0) throw MalformedFileError(0, "sidecar: bad magic");
  in.uint(4, "magic");
  const size_t version_offset = in.offset();
  const std::uint64_t version = in.uint(4, "version");
  if (version != kSidecarVersion) {
    throw MalformedFileError(version_offset, "sidecar: unsupported version " + std::to_string(version));
  }
  const size_t dim_offset = in.offset();
  const std::uint64_t dim = in.uint(4, "descriptor dimension");
  if (dim == 0 || dim > (1u << 16)) {
    throw MalformedFileError(dim_offset, "sidecar: invalid descriptor dimension");
  }
  const size_t flag_offset = in.offset();
  const std::uint64_t flag = in.uint(1, "normalized flag");
  if (flag > 1) throw MalformedFileError(flag_offset, "sidecar: invalid normalized flag");

  SidecarFile file;
  file.descriptor_dim = static_cast<int>(dim);
  file.normalized = flag == 1;
  while (!in.at_end()) {
    const size_t record_offset = in.offset();
    const std::uint64_t frame_id = in.uint(8, "frame id");
    const std::uint64_t n = in.uint(4, "keypoint count");
    const std::uint64_t record_size = 13 + 4 * dim;
    in.need(n * record_size, "keypoint block");
    FrameFeatures features;
    features.keypoints.reserve(n);
    features.descriptors.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      Keypoint kp;
      kp.position.x() = in.f32("keypoint");
      kp.position.y() = in.f32("keypoint");
      kp.octave = static_cast<int>(in.uint(1, "keypoint"));
      kp.score = in.f32("keypoint");
      FloatDescriptor d;
      d.values.resize(dim);
      for (auto& v : d.values) v = in.f32("descriptor");
      if (!file.normalized) d.normalize();
      features.keypoints.push_back(kp);
      features.descriptors.push_back(std::move(d));
    }
    if (!file.frames.emplace(frame_id, std::move(features)).second) {
      throw MalformedFileError(record_offset, "sidecar: duplicate frame id " + std::to_string(frame_id));
    }
  }
  return file;
}

SidecarFile load_sidecar(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw Error(ErrorCode::kIoError, "sidecar: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(stream)),
                                  std::istreambuf_iterator<char>());
  return parse_sidecar(bytes);
}

std::vector<std::uint8_t> serialize_sidecar(const SidecarFile& file) {
  std::vector<std::uint8_t> out = {'D', 'K', 'K', 'P'};
  put(out, kSidecarVersion, 4);
  put(out, static_cast<std::uint32_t>(file.descriptor_dim), 4);
  put(out, file.normalized ? 1 : 0, 1);
  for (const auto& [frame_id, features] : file.frames) {
    if (features.keypoints.size() != features.descriptors.size()) {
      throw Error(ErrorCode::kInvalidArgument, "sidecar: keypoint/descriptor count mismatch");
    }
    put(out, frame_id, 8);
    put(out, features.keypoints.size(), 4);
    for (size_t i = 0; i < features.keypoints.size(); ++i) {
      const Keypoint& kp = features.keypoints[i];
      const FloatDescriptor& d = features.descriptors[i];
      if (d.dim() != file.descriptor_dim || kp.octave < 0 || kp.octave > 255) {
        throw Error(ErrorCode::kInvalidArgument, "sidecar: keypoint does not fit the file header");
      }
      put_f32(out, static_cast<float>(kp.position.x()));
      put_f32(out, static_cast<float>(kp.position.y()));
      put(out, static_cast<std::uint64_t>(kp.octave), 1);
      put_f32(out, static_cast<float>(kp.score));
      for (float v : d.values) put_f32(out, v);
    }
  }
  return out;
}

void write_sidecar(const std::filesystem::path& path, const SidecarFile& file) {
  const std::vector<std::uint8_t> bytes = serialize_sidecar(file);
  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw Error(ErrorCode::kIoError, "sidecar: cannot write " + path.string());
  stream.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!stream) throw Error(ErrorCode::kIoError, "sidecar: write failed for " + path.string());
}

}  // namespace kpslam::features
