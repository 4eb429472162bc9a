// Command-line front end: run, eval, simulate, plots, config.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "kpslam/common/error.h"
#include "kpslam/geometry/pose_format.h"
#include "kpslam/pipeline/config.h"
#include "kpslam/pipeline/evaluation.h"
#include "kpslam/pipeline/plots.h"
#include "kpslam/pipeline/sequence.h"
#include "kpslam/pipeline/system.h"

namespace fs = std::filesystem;
using namespace kpslam;
using namespace kpslam::pipeline;

namespace {

struct RunArgs {
  std::string images;
  std::string synthetic;
  std::string sidecar;
  std::string config;
  std::vector<std::string> overrides;
  std::string out = "run";
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  if (a.images.empty() == a.synthetic.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "run needs exactly one of --images and --synthetic");
  }
  const SystemConfig config = load_config(a.config, a.overrides);
  SequenceSource source = a.images.empty() ? synthetic_source(sequence_spec_from_argument(a.synthetic))
                                           : image_source(a.images);
  if (!a.sidecar.empty()) source.sidecar = fs::path(a.sidecar);

  const RunResult result = run_sequence(source, config, [&](const FrameRecord& f) {
    if (a.quiet) return;
    std::fprintf(stderr, "frame %llu %s tracked %d%s\n", static_cast<unsigned long long>(f.id),
                 tracking::status_name(f.status), f.tracked, f.keyframe ? " keyframe" : "");
  });
  write_run(a.out, result, source, config);

  std::printf("frames %d lost %d keyframes %d points %zu loops_accepted %d loops_applied %d\n",
              static_cast<int>(result.frames.size()), result.n_lost(), result.map.n_keyframes(),
              result.map.points().size(), result.loops_accepted, result.loops_applied);
  if (const auto gt = source_ground_truth(source)) {
    const Trajectory est = result.final_trajectory();
    // a summary only; straight paths cannot be aligned and are skipped
    try {
      std::printf("ate_rmse %s\n", geometry::format_number(eval_ate(est, *gt, true).ate_rmse).c_str());
    } catch (const Error& e) {
      std::fprintf(stderr, "ate skipped: %s\n", e.what());
    }
  }
  return 0;
}

struct EvalArgs {
  std::string est;
  std::string gt;
  std::string mode = "ate";
  bool scale = false;
  std::string times;
  bool unit_lengths = false;
  double max_dt = kDefaultMaxTimeDifference;
};

std::vector<double> read_times(const std::string& path) {
  std::vector<double> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  double t;
  while (in >> t) out.push_back(t);
  return out;
}

int cmd_eval(const EvalArgs& a) {
  const std::vector<double> times = read_times(a.times);
  const Trajectory est = read_trajectory(a.est, times);
  const Trajectory gt = read_trajectory(a.gt, times);
  if (a.mode == "ate") {
    const EvalResult r = eval_ate(est, gt, a.scale, a.max_dt);
    std::printf("ate_rmse %s pairs %d scale %s\n", geometry::format_number(r.ate_rmse).c_str(), r.n_pairs,
                geometry::format_number(r.alignment.scale()).c_str());
  } else if (a.mode == "rel") {
    RelOptions options = a.unit_lengths ? synthetic_rel_options() : RelOptions{};
    options.alignment = a.scale ? RelAlignment::kSimilarity : RelAlignment::kNone;
    options.max_dt = a.max_dt;
    const EvalResult r = eval_rel(est, gt, options);
    std::printf("t_rel %s r_rel %s segments %d\n", geometry::format_number(r.t_rel).c_str(),
                geometry::format_number(r.r_rel).c_str(), r.n_segments);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown eval mode " + a.mode);
  }
  return 0;
}

int cmd_simulate(const std::string& spec_arg, const std::optional<std::uint64_t>& seed, const std::string& out) {
  sim::SequenceSpec spec = sequence_spec_from_argument(spec_arg);
  if (seed) spec.seed = *seed;
  const sim::SyntheticSequence seq(spec);
  sim::export_sequence(seq, out);
  std::ofstream f(fs::path(out) / "spec.txt");
  f << sequence_spec_to_text(spec);
  std::printf("frames %d landmarks %zu out %s\n", seq.size(), seq.world().landmarks.size(), out.c_str());
  return 0;
}

int cmd_plots(const std::string& run_dir, const RunPlotOptions& options) {
  for (const fs::path& p : emit_plots(run_dir, options)) std::printf("%s\n", p.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keypoint-based monocular SLAM"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the SLAM pipeline on a sequence");
  run_cmd->add_option("--images", run.images, "Sequence directory (images/ or image_0/, times.txt, calib.txt)");
  run_cmd->add_option("--synthetic", run.synthetic, "Synthetic spec file, or a preset 'kind[:n_frames]'");
  run_cmd->add_option("--sidecar", run.sidecar, "Keypoint sidecar file");
  run_cmd->add_option("--config", run.config, "key=value config file");
  run_cmd->add_option("--set", run.overrides, "Config override key=value (repeatable)");
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
  run_cmd->add_flag("--quiet", run.quiet, "No per-frame progress on stderr");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trajectory against ground truth");
  eval_cmd->add_option("--est", ev.est, "Estimated trajectory (TUM or KITTI)")->required();
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth trajectory (TUM or KITTI)")->required();
  eval_cmd->add_option("--mode", ev.mode, "ate or rel")->check(CLI::IsMember({"ate", "rel"}))->capture_default_str();
  eval_cmd->add_flag("--scale", ev.scale, "Align with scale (monocular)");
  eval_cmd->add_option("--times", ev.times, "Timestamps for KITTI-format files");
  eval_cmd->add_flag("--unit-lengths", ev.unit_lengths, "Sub-lengths 1..8 instead of 100..800");
  eval_cmd->add_option("--max-dt", ev.max_dt, "Timestamp association tolerance")->capture_default_str();

  std::string spec_arg = "square-loop";
  std::optional<std::uint64_t> seed;
  std::string sim_out = "sequence";
  auto* sim_cmd = app.add_subcommand("simulate", "Render a synthetic sequence with sidecar and ground truth");
  sim_cmd->add_option("--spec", spec_arg, "Spec file or preset 'kind[:n_frames]'")->capture_default_str();
  sim_cmd->add_option("--seed", seed, "Override the spec seed");
  sim_cmd->add_option("--out", sim_out, "Output directory")->capture_default_str();

  std::string run_dir;
  RunPlotOptions plot_options;
  bool no_scale = false;
  auto* plots_cmd = app.add_subcommand("plots", "Write trajectory overlay and PR data for a run directory");
  plots_cmd->add_option("--run-dir", run_dir, "Output directory of 'run'")->required();
  plots_cmd->add_option("--loop-radius", plot_options.loop_radius, "True revisit distance")->capture_default_str();
  plots_cmd->add_option("--loop-angle", plot_options.loop_max_angle_deg, "True revisit view angle, degrees")
      ->capture_default_str();
  plots_cmd->add_flag("--no-scale", no_scale, "Rigid instead of similarity alignment");

  std::string config_file;
  std::vector<std::string> config_overrides;
  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");
  config_cmd->add_option("--config", config_file, "key=value config file");
  config_cmd->add_option("--set", config_overrides, "Config override key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s: %s\n", error_code_name(ErrorCode::kInvalidArgument), e.what());
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_eval(ev);
    if (*sim_cmd) return cmd_simulate(spec_arg, seed, sim_out);
    if (*plots_cmd) {
      plot_options.with_scale = !no_scale;
      return cmd_plots(run_dir, plot_options);
    }
    if (*config_cmd) {
      std::fputs(config_to_text(load_config(config_file, config_overrides)).c_str(), stdout);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal_error: %s\n", e.what());
    return 1;
  }
  return 0;
}
