#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "kpslam/features/descriptor.h"

namespace kpslam::features {

struct FrameFeatures {
  std::vector<Keypoint> keypoints;
  std::vector<FloatDescriptor> descriptors;
};

/// Keypoint sidecar file, little-endian:
///   "DKKP" u32 version=1 u32 D u8 normalized
///   repeated: u64 frame_id u32 N, N x {f32 x f32 y u8 octave f32 score D x f32}
struct SidecarFile {
  int descriptor_dim = kDefaultDescriptorDim;
  bool normalized = true;
  std::map<std::uint64_t, FrameFeatures> frames;
};

inline constexpr std::uint32_t kSidecarVersion = 1;

/// Throws MalformedFileError with the failing byte offset, kIoError if unreadable.
/// Descriptors are L2-normalized on load when the file is flagged unnormalized.
SidecarFile load_sidecar(const std::filesystem::path& path);
SidecarFile parse_sidecar(const std::vector<std::uint8_t>& bytes);

/// Frames are written in ascending id order.
void write_sidecar(const std::filesystem::path& path, const SidecarFile& file);
std::vector<std::uint8_t> serialize_sidecar(const SidecarFile& file);

}  // namespace kpslam::features
