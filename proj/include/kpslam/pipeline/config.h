#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kpslam/features/fallback_detector.h"
#include "kpslam/loop/loop_corrector.h"
#include "kpslam/loop/loop_detector.h"
#include "kpslam/mapping/local_mapping.h"
#include "kpslam/tracking/initializer.h"
#include "kpslam/tracking/tracker.h"

namespace kpslam::pipeline {

struct FeatureConfig {
  int total_keypoints = 3000;
  int pyramid_levels = 3;
  double scale_factor = 2.0;
  features::FallbackOptions fallback;  // used when no sidecar is given
};

struct SystemConfig {
  FeatureConfig features;
  tracking::TrackerOptions tracking;
  tracking::InitializerOptions init;
  int init_max_frames = 30;  // the initialization reference is replaced after this many frames
  mapping::LocalMappingOptions mapping;
  bool loop_enabled = true;
  int join_threshold = loop::kDefaultJoinThreshold;
  loop::LoopDetectorOptions loop;
  loop::CorrectionOptions correction;
};

/// A named setting bound to a field of some options struct.
using FieldRef = std::variant<int*, double*, bool*, std::uint64_t*>;
using FieldTable = std::vector<std::pair<std::string, FieldRef>>;

/// Every tunable of the system under its dotted key, e.g. tracking.search_radius.
FieldTable config_fields(SystemConfig& config);

/// Parses `key=value` lines. Blank lines and lines starting with '#' are
/// skipped; whitespace around keys and values is trimmed. Throws kConfigError
/// naming `origin` and the line number for a line without '='.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& origin = "config");

/// Throws kConfigError for an unknown key or a value that does not parse.
void set_field(FieldTable& fields, const std::string& key, const std::string& value);
/// `key=value` form of set_field.
void apply_override(FieldTable& fields, const std::string& assignment);

/// Defaults, then the file (if non-empty), then the overrides in order.
SystemConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});

/// All keys in table order with their current values; parses back to the same config.
std::string config_to_text(const SystemConfig& config);

std::string format_field(const FieldRef& field);

}  // namespace kpslam::pipeline
