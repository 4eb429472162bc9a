#include "kpslam/pipeline/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "kpslam/common/error.h"

namespace kpslam::pipeline {

namespace {

void add_ba(FieldTable& t, const std::string& prefix, mapping::BundleAdjustOptions& o) {
  t.emplace_back(prefix + "huber_delta", &o.huber_delta);
  t.emplace_back(prefix + "chi2_threshold", &o.chi2_threshold);
  t.emplace_back(prefix + "max_iterations", &o.max_iterations);
  t.emplace_back(prefix + "remove_outliers", &o.remove_outliers);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

FieldTable config_fields(SystemConfig& c) {
  FieldTable t;
  t.emplace_back("features.total_keypoints", &c.features.total_keypoints);
  t.emplace_back("features.pyramid_levels", &c.features.pyramid_levels);
  t.emplace_back("features.scale_factor", &c.features.scale_factor);
  t.emplace_back("features.descriptor_dim", &c.features.fallback.descriptor_dim);
  t.emplace_back("features.grid_rows", &c.features.fallback.grid.rows);
  t.emplace_back("features.grid_cols", &c.features.fallback.grid.cols);
  t.emplace_back("features.harris_k", &c.features.fallback.harris_k);
  t.emplace_back("features.min_response", &c.features.fallback.min_response);

  tracking::TrackerOptions& tr = c.tracking;
  t.emplace_back("tracking.search_radius", &tr.search_radius);
  t.emplace_back("tracking.max_hamming", &tr.max_hamming);
  t.emplace_back("tracking.use_coarse_alignment", &tr.use_coarse_alignment);
  t.emplace_back("tracking.keyframe_max_interval", &tr.keyframe_max_interval);
  t.emplace_back("tracking.keyframe_ratio", &tr.keyframe_ratio);
  t.emplace_back("tracking.coarse.patch_size", &tr.coarse.patch_size);
  t.emplace_back("tracking.coarse.huber_delta", &tr.coarse.huber_delta);
  t.emplace_back("tracking.coarse.max_iterations", &tr.coarse.max_iterations);
  t.emplace_back("tracking.coarse.min_blocks", &tr.coarse.min_blocks);
  t.emplace_back("tracking.coarse.extra_levels", &tr.coarse.extra_levels);
  t.emplace_back("tracking.coarse.trim_passes", &tr.coarse.trim_passes);
  t.emplace_back("tracking.coarse.trim_factor", &tr.coarse.trim_factor);
  t.emplace_back("tracking.coarse.trim_floor", &tr.coarse.trim_floor);
  t.emplace_back("tracking.refine.huber_delta", &tr.refine.huber_delta);
  t.emplace_back("tracking.refine.chi2_threshold", &tr.refine.chi2_threshold);
  t.emplace_back("tracking.refine.rounds", &tr.refine.rounds);
  t.emplace_back("tracking.refine.iterations_per_round", &tr.refine.iterations_per_round);
  t.emplace_back("tracking.refine.min_inliers", &tr.refine.min_inliers);

  t.emplace_back("init.ratio", &c.init.ratio);
  t.emplace_back("init.max_hamming", &c.init.max_hamming);
  t.emplace_back("init.min_matches", &c.init.min_matches);
  t.emplace_back("init.min_points", &c.init.min_points);
  t.emplace_back("init.min_median_parallax_deg", &c.init.min_median_parallax_deg);
  t.emplace_back("init.ransac_threshold", &c.init.ransac_threshold);
  t.emplace_back("init.chi2_threshold", &c.init.chi2_threshold);
  t.emplace_back("init.max_frames", &c.init_max_frames);

  mapping::LocalMappingOptions& m = c.mapping;
  t.emplace_back("mapping.max_neighbours", &m.max_neighbours);
  t.emplace_back("mapping.max_hamming", &m.max_hamming);
  t.emplace_back("mapping.epipolar_threshold", &m.epipolar_threshold);
  t.emplace_back("mapping.min_parallax_deg", &m.min_parallax_deg);
  t.emplace_back("mapping.chi2_threshold", &m.chi2_threshold);
  t.emplace_back("mapping.min_baseline_ratio", &m.min_baseline_ratio);
  t.emplace_back("mapping.fuse_radius", &m.fuse_radius);
  t.emplace_back("mapping.min_found_ratio", &m.min_found_ratio);
  t.emplace_back("mapping.min_observations", &m.min_observations);
  t.emplace_back("mapping.grace_keyframes", &m.grace_keyframes);
  t.emplace_back("mapping.run_bundle_adjustment", &m.run_bundle_adjustment);
  add_ba(t, "mapping.ba.", m.ba);

  t.emplace_back("loop.enabled", &c.loop_enabled);
  t.emplace_back("loop.join_threshold", &c.join_threshold);
  loop::LoopDetectorOptions& l = c.loop;
  t.emplace_back("loop.min_matches", &l.min_matches);
  t.emplace_back("loop.consistency", &l.consistency);
  t.emplace_back("loop.recent_exclusion", &l.recent_exclusion);
  t.emplace_back("loop.min_score", &l.min_score);
  t.emplace_back("loop.max_hamming", &l.max_hamming);
  t.emplace_back("loop.gms.rows", &l.gms.rows);
  t.emplace_back("loop.gms.cols", &l.gms.cols);
  t.emplace_back("loop.gms.alpha", &l.gms.alpha);
  t.emplace_back("loop.sim3.ransac_iterations", &l.sim3.ransac_iterations);
  t.emplace_back("loop.sim3.chi2_threshold", &l.sim3.chi2_threshold);
  t.emplace_back("loop.sim3.min_inliers", &l.sim3.min_inliers);
  t.emplace_back("loop.sim3.refine_iterations", &l.sim3.refine_iterations);
  t.emplace_back("loop.sim3.guided_radius", &l.sim3.guided_radius);
  t.emplace_back("loop.sim3.max_hamming", &l.sim3.max_hamming);
  t.emplace_back("loop.sim3.seed", &l.sim3.seed);
  t.emplace_back("loop.correction.min_covisibility", &c.correction.min_covisibility);
  t.emplace_back("loop.correction.graph_iterations", &c.correction.graph_iterations);
  t.emplace_back("loop.correction.run_global_ba", &c.correction.run_global_ba);
  add_ba(t, "loop.correction.ba.", c.correction.ba);
  return t;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos || trim(s.substr(0, eq)).empty()) {
      throw Error(ErrorCode::kConfigError, origin + ":" + std::to_string(n) + ": expected key=value");
    }
    out.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return out;
}

void set_field(FieldTable& fields, const std::string& key, const std::string& value) {
  for (auto& [name, ref] : fields) {
    if (name != key) continue;
    bool ok = false;
    if (auto* p = std::get_if<int*>(&ref)) {
      ok = parse_number(value, **p);
    } else if (auto* p = std::get_if<double*>(&ref)) {
      ok = parse_number(value, **p);
    } else if (auto* p = std::get_if<std::uint64_t*>(&ref)) {
      ok = parse_number(value, **p);
    } else if (auto* p = std::get_if<bool*>(&ref)) {
      if (value == "true" || value == "1") {
        **p = true;
        ok = true;
      } else if (value == "false" || value == "0") {
        **p = false;
        ok = true;
      }
    }
    if (!ok) throw Error(ErrorCode::kConfigError, "bad value '" + value + "' for " + key);
    return;
  }
  throw Error(ErrorCode::kConfigError, "unknown config key " + key);
}

void apply_override(FieldTable& fields, const std::string& assignment) {
  const auto kv = parse_key_values(assignment, "override");
  if (kv.size() != 1) throw Error(ErrorCode::kConfigError, "override must be key=value: " + assignment);
  set_field(fields, kv[0].first, kv[0].second);
}

SystemConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  SystemConfig config;
  FieldTable fields = config_fields(config);
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_key_values(ss.str(), file.string())) set_field(fields, k, v);
  }
  for (const std::string& o : overrides) apply_override(fields, o);
  return config;
}

std::string format_field(const FieldRef& field) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else {
          char buf[64];
          auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), *p);
          return std::string(buf, end);
        }
      },
      field);
}

std::string config_to_text(const SystemConfig& config) {
  SystemConfig copy = config;
  std::string out;
  for (const auto& [key, ref] : config_fields(copy)) out += key + "=" + format_field(ref) + "\n";
  return out;
}

}  // namespace kpslam::pipeline
