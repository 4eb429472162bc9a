// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// The dataset smoke test runs on the sequence in $KPSLAM_SMOKE_DATASET
// (KITTI layout: image_0/, times.txt, calib.txt, poses.txt) with the optional
// sidecar in $KPSLAM_SMOKE_SIDECAR. Without it, a rendered sequence exported
// in the same layout stands in, and the line says so.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "../support/loop_scenario.h"
#include "../support/pnp_scenario.h"
#include "../support/scenario.h"
#include "kpslam/features/descriptor.h"
#include "kpslam/geometry/alignment.h"
#include "kpslam/geometry/pose_format.h"
#include "kpslam/loop/gms.h"
#include "kpslam/loop/loop_corrector.h"
#include "kpslam/pipeline/evaluation.h"
#include "kpslam/pipeline/plots.h"
#include "kpslam/pipeline/system.h"
#include "kpslam/tracking/coarse_alignment.h"

using namespace kpslam;
using geometry::SE3Pose;
using geometry::Sim3Transform;
using geometry::Vector2;
using geometry::Vector3;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) { return geometry::format_number(v); }

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "; " << num(std::round(secs * 100) / 100)
       << " s";
  if (limit_s > 0) {
    line << " (limit " << num(limit_s) << " s)";
    if (secs >= limit_s) {
      o.pass = false;
      line << " over time";
    }
  }
  if (!o.pass) ++failures;
  std::string text = line.str();
  if (!o.pass && text.rfind("PASS", 0) == 0) text.replace(0, 4, "FAIL");
  std::printf("%s\n", text.c_str());
  std::fflush(stdout);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kpslam_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- coarse alignment

Outcome coarse_alignment() {
  const geometry::CameraIntrinsics K{380, 380, 319.5, 239.5, 640, 480};
  sim::WorldBounds b;
  b.volume = {Vector3(-3.5, -2.5, 4.0), Vector3(3.5, 2.5, 8.0)};
  const sim::SyntheticWorld world = sim::gen_world(11, 200, b);
  const Vector3 axis = Vector3(0.3, 1.0, 0.2).normalized();
  const double angle = 2.0 * M_PI / 180.0;
  const SE3Pose truth(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)), Vector3(0.06, -0.02, 0.078));

  map::GlobalMap m;
  scenario::SimFrame last = scenario::sim_frame(world, SE3Pose(), K, 0);
  scenario::ground_truth_map(m, last, world);
  const scenario::SimFrame cur = scenario::sim_frame(world, truth, K, 1);
  const auto points = tracking::alignment_points(last.frame, m);
  const SE3Pose est = tracking::coarse_align(last.frame, cur.frame, points, SE3Pose(), K);
  const double rot_err = geometry::rotation_distance_deg(est, truth);
  const double t_ratio = est.translation().norm() / truth.translation().norm();

  // independent brute force: truncated squared residual (splats overlap, so
  // some patches never agree) over a 5^6 grid spanning the motion on a coarse
  // pyramid level, then local 3^6 grids with halving steps down to level 0
  auto cost = [&](const SE3Pose& T, int level) {
    const std::vector<double> r = tracking::photometric_residuals(last.frame, cur.frame, points, T, K, level);
    if (r.size() < 16 * 20) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double v : r) s += std::min(v * v, 100.0);
    return s / r.size();
  };
  // rotations about the point centroid, which decouples them from translation
  Vector3 centroid = Vector3::Zero();
  for (const auto& p : points) centroid += p.p_last;
  centroid /= static_cast<double>(points.size());
  auto node = [&](const Vector3& w, const Vector3& t) {
    const Eigen::Quaterniond q = w.norm() > 0 ? Eigen::Quaterniond(Eigen::AngleAxisd(w.norm(), w.normalized()))
                                              : Eigen::Quaterniond::Identity();
    return SE3Pose(q, t + centroid - q * centroid);
  };
  auto search = [&](const Vector3& w0, const Vector3& t0, double rot_step, double t_step, int half, int level,
                    Vector3& w_best, Vector3& t_best) {
    const int side = 2 * half + 1;
    double best = std::numeric_limits<double>::infinity();
    int total = 1;
    for (int c = 0; c < 6; ++c) total *= side;
    for (int i = 0; i < total; ++i) {
      int c[6], rest = i;
      for (int& v : c) {
        v = rest % side - half;
        rest /= side;
      }
      const Vector3 w = w0 + rot_step * Vector3(c[0], c[1], c[2]);
      const Vector3 t = t0 + t_step * Vector3(c[3], c[4], c[5]);
      const double v = cost(node(w, t), level);
      if (v < best) {
        best = v;
        w_best = w;
        t_best = t;
      }
    }
  };
  double rot_step = 1.0 * M_PI / 180.0, t_step = 0.05;
  Vector3 w = Vector3::Zero(), t = Vector3::Zero();
  search(Vector3::Zero(), Vector3::Zero(), rot_step, t_step, 2, 2, w, t);
  // pattern search: recentre until the centre wins, then halve the step
  for (int pass = 0; pass < 5; ++pass) {
    rot_step /= 2;
    t_step /= 2;
    for (int move = 0; move < 20; ++move) {
      const Vector3 w0 = w, t0 = t;
      search(w0, t0, rot_step, t_step, 1, std::max(0, 1 - pass), w, t);
      if (w == w0 && t == t0) break;
    }
  }
  // compare in grid coordinates: every axis within two final steps
  const Eigen::AngleAxisd est_aa(est.rotation());
  const Vector3 w_est = est_aa.angle() * est_aa.axis();
  const Vector3 t_est = est.translation() - centroid + est.rotation() * centroid;
  const double rot_gap = (w - w_est).cwiseAbs().maxCoeff() / rot_step;
  const double t_gap = (t - t_est).cwiseAbs().maxCoeff() / t_step;
  const bool agree = rot_gap <= 2.0 && t_gap <= 2.0;
  const bool pass = rot_err <= 0.5 && std::abs(t_ratio - 1.0) <= 0.05 && agree;
  return {pass, "rotation error " + num(rot_err) + " deg (<= 0.5), |t| ratio " + num(t_ratio) +
                    " (within 5%); grid search result differs by " + num(rot_gap) + " / " + num(t_gap) +
                    " final grid steps in rotation / translation (<= 2)"};
}

// ---------------------------------------------------------------- pose refinement

Outcome pose_refinement() {
  const scenario::PnpProblem p = scenario::pnp_problem(1);
  const auto r = tracking::refine_pose(p.obs, scenario::perturbed(p.truth), scenario::pnp_camera());
  const double rot = geometry::rotation_distance_deg(r.pose, p.truth);
  const double trans = geometry::translation_distance(r.pose, p.truth);
  const std::vector<bool> oracle = scenario::ransac_pnp_verdicts(p.obs);
  int agree = 0;
  for (size_t i = 0; i < oracle.size(); ++i) agree += oracle[i] == r.inlier[i] ? 1 : 0;
  const bool pass = rot <= 0.2 && trans <= 0.01 && r.n_inliers >= 75 && agree >= 95;
  return {pass, "error " + num(rot) + " deg / " + num(trans) + " units (<= 0.2 / 0.01), inliers " +
                    std::to_string(r.n_inliers) + " (>= 75), RANSAC-PnP agreement " + std::to_string(agree) +
                    "/100 (>= 95)"};
}

// ---------------------------------------------------------------- two-stage ablation

Outcome two_stage_ablation() {
  const sim::SequenceSpec spec = sim::default_sequence_spec(sim::TrajectoryKind::kFastRotation, 48);
  const pipeline::SequenceSource src = pipeline::synthetic_source(spec);
  auto stats = [&](bool coarse) {
    pipeline::SystemConfig c;
    c.tracking.use_coarse_alignment = coarse;
    const pipeline::RunResult r = pipeline::run_sequence(src, c);
    int lost = 0, tracked = 0, posed_after_init = 0, after_init = 0;
    double inliers = 0.0;
    bool started = false;
    for (const auto& f : r.frames) {
      started |= f.has_pose && f.status == tracking::TrackingStatus::kOk && f.id > 0;
      lost += f.status == tracking::TrackingStatus::kLost ? 1 : 0;
      if (started) {
        ++after_init;
        posed_after_init += f.has_pose ? 1 : 0;
      }
      if (f.has_pose) {
        ++tracked;
        inliers += f.tracked;
      }
    }
    struct S {
      int lost, posed, total;
      double mean;
    };
    return S{lost, posed_after_init, after_init, tracked ? inliers / tracked : 0.0};
  };
  const auto two = stats(true);
  const auto cv = stats(false);
  const bool complete = two.lost == 0 && two.posed == two.total;
  const bool pass = complete && (cv.lost > 0 || cv.mean < two.mean);
  return {pass, "two-stage tracked " + std::to_string(two.posed) + "/" + std::to_string(two.total) +
                    " frames after initialization, lost " + std::to_string(two.lost) + ", mean inliers " +
                    num(std::round(two.mean * 10) / 10) + "; constant velocity lost " + std::to_string(cv.lost) +
                    ", mean inliers " + num(std::round(cv.mean * 10) / 10)};
}

// ---------------------------------------------------------------- binarization

Outcome binarization() {
  std::mt19937 rng(9);
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::uniform_real_distribution<double> log_alpha(std::log(1e-3), std::log(1e3));
  long exceptions = 0, scale_mismatches = 0;
  for (int k = 0; k < 100000; ++k) {
    features::FloatDescriptor d;
    d.values.resize(256);
    for (float& v : d.values) v = n(rng);
    d.normalize();
    if (k % 10 == 0) d.values[k % 256] = 0.0f;  // exact zeros belong to the positive side
    const features::BinaryDescriptor b = features::binarize(d);
    for (int i = 0; i < 256; ++i) exceptions += b.bit(i) != (d.values[i] >= 0.0f) ? 1 : 0;
    features::FloatDescriptor scaled = d;
    const float alpha = static_cast<float>(std::exp(log_alpha(rng)));
    for (float& v : scaled.values) v *= alpha;
    scale_mismatches += features::binarize(scaled) == b ? 0 : 1;
  }
  return {exceptions == 0 && scale_mismatches == 0,
          "1e5 descriptors: " + std::to_string(exceptions) + " bit exceptions, " + std::to_string(scale_mismatches) +
              " scale-invariance mismatches (both must be 0)"};
}

// ---------------------------------------------------------------- loop recall

Outcome loop_recall() {
  scenario::LoopScene s = scenario::build_loop_scene(60, 1.25);
  loop::Vocabulary vocab;
  std::vector<features::BinaryDescriptor> centroids;  // exhaustive oracle leaves
  long leaf_mismatches = 0;
  std::vector<pipeline::LoopDetection> detections;
  int n_positive = 0;
  for (size_t k = 0; k < s.kfs.size(); ++k) {
    const auto added = vocab.add(s.map, s.kfs[k]);
    const auto& descriptors = s.map.keyframe(s.kfs[k]).descriptors;
    for (size_t i = 0; i < descriptors.size(); ++i) {
      int best = -1, best_dist = std::numeric_limits<int>::max();
      for (size_t c = 0; c < centroids.size(); ++c) {
        const int h = features::hamming(descriptors[i], centroids[c]);
        if (h < best_dist) {
          best_dist = h;
          best = static_cast<int>(c);
        }
      }
      if (best < 0 || best_dist > vocab.join_threshold()) {
        centroids.push_back(descriptors[i]);
        best = static_cast<int>(centroids.size()) - 1;
      }
      leaf_mismatches += added.assignments[i] == best ? 0 : 1;
    }
    // ground truth by landmark overlap: a pair shows the same place when it
    // shares at least 20% of the earlier keyframe's landmarks
    const std::set<map::KeyFrameId> excluded = loop::loop_exclusions(s.map, s.kfs[k]);
    const std::set<int> mine(s.landmark_ids[k].begin(), s.landmark_ids[k].end());
    auto same_place = [&](size_t j) {
      int shared = 0;
      for (int lm : s.landmark_ids[j]) shared += static_cast<int>(mine.count(lm));
      return shared >= 0.2 * s.landmark_ids[j].size();
    };
    for (size_t j = 0; j < k; ++j) {
      if (!excluded.count(s.kfs[j]) && same_place(j)) {
        ++n_positive;
        break;
      }
    }
    const auto ranked = vocab.query(s.kfs[k], excluded);
    if (ranked.empty()) continue;
    size_t j = 0;
    while (s.kfs[j] != ranked[0].first) ++j;
    detections.push_back({static_cast<map::KeyFrameId>(k), static_cast<map::KeyFrameId>(j), ranked[0].second,
                          same_place(j)});
  }
  const double recall = pipeline::recall_at_full_precision(pipeline::pr_sweep(detections, n_positive));
  // the post-lap keyframes alone, at the lowest threshold above every false detection
  double threshold = 0.0;
  for (const auto& d : detections) {
    if (!d.correct) threshold = std::max(threshold, d.score);
  }
  int post_lap_found = 0;
  for (const auto& d : detections) {
    post_lap_found += d.correct && d.query >= s.first_revisit && d.score > threshold ? 1 : 0;
  }
  const int n_post_lap = static_cast<int>(s.kfs.size()) - s.first_revisit;
  const double post_lap_recall = static_cast<double>(post_lap_found) / n_post_lap;
  const bool pass = recall >= 0.9 && post_lap_recall >= 0.9 && n_post_lap == 12 && leaf_mismatches == 0 &&
                    vocab.n_leaves() == static_cast<int>(centroids.size());
  return {pass, "recall at 100% precision " + num(recall) + " over " + std::to_string(n_positive) +
                    " overlapping queries and " + num(post_lap_recall) + " over the " + std::to_string(n_post_lap) +
                    " post-lap revisits (both >= 0.9); leaf assignments differing from exhaustive oracle " +
                    std::to_string(leaf_mismatches) + " (leaves " + std::to_string(vocab.n_leaves()) + " vs " +
                    std::to_string(centroids.size()) + ")"};
}

// ---------------------------------------------------------------- GMS

Outcome gms() {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> ux(0, 639.9), uy(0, 479.9);
  const double th = 4.0 * M_PI / 180.0;
  const Eigen::Rotation2Dd R(th);
  const Vector2 centre(320, 240), shift(18.0, -9.0);
  std::vector<Vector2> a, b;
  std::vector<std::pair<int, int>> matches;
  std::vector<bool> inlier;
  while (matches.size() < 2000) {
    const bool bad = matches.size() % 10 < 3;  // 30% contamination
    const Vector2 p(ux(rng), uy(rng));
    const Vector2 q = bad ? Vector2(ux(rng), uy(rng)) : Vector2(R * (p - centre) + centre + shift);
    if (q.x() < 0 || q.y() < 0 || q.x() >= 640 || q.y() >= 480) continue;
    matches.emplace_back(static_cast<int>(a.size()), static_cast<int>(b.size()));
    a.push_back(p);
    b.push_back(q);
    inlier.push_back(!bad);
  }
  const std::vector<int> kept = loop::gms_filter(a, b, matches, {640, 480}, {640, 480});
  std::vector<bool> is_kept(matches.size(), false);
  for (int k : kept) is_kept[k] = true;
  int n_in = 0, n_out = 0, kept_in = 0, rejected_out = 0;
  for (size_t i = 0; i < matches.size(); ++i) {
    if (inlier[i]) {
      ++n_in;
      kept_in += is_kept[i] ? 1 : 0;
    } else {
      ++n_out;
      rejected_out += is_kept[i] ? 0 : 1;
    }
  }
  const double retention = static_cast<double>(kept_in) / n_in, rejection = static_cast<double>(rejected_out) / n_out;
  return {retention >= 0.9 && rejection >= 0.9,
          "inlier retention " + num(retention) + " (>= 0.9), outlier rejection " + num(rejection) + " (>= 0.9), " +
              std::to_string(n_in) + " planted / " + std::to_string(n_out) + " random"};
}

// ---------------------------------------------------------------- loop correction

Outcome loop_correction() {
  auto first_loop = [](scenario::LoopScene& s, loop::Vocabulary& vocab) -> std::optional<loop::LoopCandidate> {
    loop::LoopDetector det;
    for (map::KeyFrameId kf : s.kfs) {
      vocab.add(s.map, kf);
      const auto c = det.detect(s.map, vocab, kf, s.seq.camera());
      if (c && c->verdict == loop::LoopVerdict::kAccepted) return c;
    }
    return std::nullopt;
  };
  scenario::LoopScene s = scenario::build_loop_scene(60, 1.25, 0.01);
  loop::Vocabulary vocab;
  const auto c = first_loop(s, vocab);
  if (!c) return {false, "no loop accepted on the drifted square loop"};
  const double before = scenario::keyframe_ate(s.map, s.kfs, s.truth);

  // forced failure first, on a copy of the same state
  map::GlobalMap untouched = s.map;
  map::GlobalMap forced = s.map;
  loop::CorrectionOptions bad;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bad.extra_edges.push_back({s.kfs[5], s.kfs[30], Sim3Transform(1.0, Eigen::Quaterniond::Identity(), Vector3(nan, 0, 0))});
  const auto failed = loop::correct_loop(forced, *c, s.seq.camera(), bad);
  const bool restored = !failed.applied && forced == untouched;

  const auto r = loop::correct_loop(s.map, *c, s.seq.camera());
  const double after = scenario::keyframe_ate(s.map, s.kfs, s.truth);
  const bool pass = r.applied && after <= 0.2 * before && restored && s.map.audit().empty();
  return {pass, "keyframe ATE " + num(before) + " -> " + num(after) + " (ratio " + num(after / before) +
                    ", <= 0.2); forced optimizer failure " + (restored ? "restored the map exactly" : "left the map changed")};
}

// ---------------------------------------------------------------- evaluation

Outcome evaluation_exactness() {
  sim::TrajectorySpec ts;
  ts.kind = sim::TrajectoryKind::kSquareLoop;
  ts.n_frames = 80;
  pipeline::Trajectory gt;
  const auto poses = sim::gen_trajectory(ts);
  for (size_t k = 0; k < poses.size(); ++k) gt.push_back({0.1 * k, poses[k].inverse()});
  const double self_ate = pipeline::eval_ate(gt, gt, true).ate_rmse;

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<Vector3> src, dst;
  const Sim3Transform S(2.5, Eigen::Quaterniond(Eigen::AngleAxisd(1.1, Vector3(-1, 2, 0.5).normalized())),
                        Vector3(4, -3, 7));
  for (int i = 0; i < 200; ++i) {
    src.emplace_back(u(rng), u(rng), u(rng));
    dst.push_back(S * src.back());
  }
  const Sim3Transform A = geometry::umeyama_align(src, dst, true);
  const double err = std::max({std::abs(A.scale() - S.scale()), A.rotation().angularDistance(S.rotation()),
                               (A.translation() - S.translation()).norm()});

  pipeline::Trajectory line, biased;
  for (int k = 0; k < 2000; ++k) {
    const Eigen::Quaterniond q(Eigen::AngleAxisd(0.02 * std::sin(0.05 * k), Vector3::UnitY()));
    line.push_back({0.1 * k, SE3Pose(q, Vector3(0.5 * k, 0, 0))});
    biased.push_back({0.1 * k, SE3Pose(q, Vector3(1.01 * 0.5 * k, 0, 0))});
  }
  const double t_rel = pipeline::eval_rel(biased, line).t_rel;
  const bool pass = self_ate <= 1e-12 && err <= 1e-9 && std::abs(t_rel - 1.0) <= 0.05;
  return {pass, "ATE(gt, gt) " + num(self_ate) + " (zero to 1e-12), umeyama similarity error " + num(err) +
                    " (<= 1e-9), t_rel under 1% scale bias " + num(t_rel) + "% (1.0 +- 0.05)"};
}

// ---------------------------------------------------------------- determinism

Outcome determinism() {
  sim::SequenceSpec spec = sim::default_sequence_spec(sim::TrajectoryKind::kSquareLoop, 80, 4);
  spec.keypoint_jitter = 0.5;
  const pipeline::SequenceSource src = pipeline::synthetic_source(spec);
  const pipeline::SystemConfig config;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const pipeline::RunResult first = pipeline::run_sequence(src, config);
  pipeline::write_run(a, first, src, config);
  pipeline::write_run(b, pipeline::run_sequence(src, config), src, config);
  int differing = 0;
  for (const char* f : {"trajectory.txt", "trajectory_online.txt", "trajectory_kitti.txt"}) {
    differing += slurp(a / f) == slurp(b / f) ? 0 : 1;
  }
  const bool nonempty = fs::file_size(a / "trajectory.txt") > 0;
  return {differing == 0 && nonempty, "square loop, seed 4, 80 frames, " + std::to_string(first.loops_applied) +
                                          " loop(s) applied: " + std::to_string(differing) +
                                          " of 3 trajectory files differ between two runs (must be 0)"};
}

// ---------------------------------------------------------------- dataset smoke

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string("\"") + KPSLAM_CLI + "\" " + args + " > \"" + stdout_file.string() + "\"";
  return std::system(cmd.c_str());
}

Outcome dataset_smoke() {
  std::string note;
  fs::path dataset;
  std::string sidecar;
  bool unit_lengths = false;
  if (const char* env = std::getenv("KPSLAM_SMOKE_DATASET"); env && *env) {
    dataset = env;
    if (const char* sc = std::getenv("KPSLAM_SMOKE_SIDECAR"); sc && *sc) sidecar = sc;
    note = "dataset " + dataset.string();
  } else {
    // stand-in: a rendered sequence exported in KITTI layout
    dataset = scratch("smoke");
    const sim::SyntheticSequence seq(sim::default_sequence_spec(sim::TrajectoryKind::kCircle, 30));
    sim::export_sequence(seq, dataset);
    fs::rename(dataset / "images", dataset / "image_0");
    fs::remove(dataset / "groundtruth.txt");
    const auto& K = seq.camera();
    std::ofstream(dataset / "calib.txt") << "P0: " << num(K.fx) << " 0 " << num(K.cx) << " 0 0 " << num(K.fy) << ' '
                                         << num(K.cy) << " 0 0 0 1 0\n";
    sidecar = (dataset / "features.dkkp").string();
    unit_lengths = true;
    note = "no KPSLAM_SMOKE_DATASET given, synthetic KITTI-layout stand-in";
  }
  const fs::path out = scratch("smoke_run");
  std::string run_args = "run --quiet --images \"" + dataset.string() + "\" --out \"" + (out / "run").string() + "\"";
  if (!sidecar.empty()) run_args += " --sidecar \"" + sidecar + "\"";
  if (run_cli(run_args, out / "run_stdout.txt") != 0) return {false, note + ": run failed"};
  for (const char* f : {"trajectory.txt", "loops.txt", "groundtruth.txt"}) {
    if (!fs::exists(out / "run" / f)) return {false, note + ": run did not write " + f};
  }
  std::string eval_args = "eval --mode rel --scale --est \"" + (out / "run" / "trajectory.txt").string() + "\" --gt \"" +
                          (out / "run" / "groundtruth.txt").string() + "\"";
  if (unit_lengths) eval_args += " --unit-lengths";
  if (run_cli(eval_args, out / "eval_stdout.txt") != 0) return {false, note + ": eval failed"};
  std::istringstream in(slurp(out / "eval_stdout.txt"));
  std::string k1, k2;
  double t_rel = std::nan(""), r_rel = std::nan("");
  in >> k1 >> t_rel >> k2 >> r_rel;
  const bool finite = k1 == "t_rel" && k2 == "r_rel" && std::isfinite(t_rel) && std::isfinite(r_rel);
  return {finite, note + ": run completed, trajectory and loop log written, t_rel " + num(t_rel) + "% r_rel " +
                      num(r_rel) + " deg/100 (finite, no accuracy target)"};
}

}  // namespace

int main() {
  criterion("photometric alignment oracle", 5, coarse_alignment);
  criterion("pose refinement oracle", 1, pose_refinement);
  criterion("two-stage tracking ablation", 30, two_stage_ablation);
  criterion("binarization law", 0, binarization);
  criterion("online BoW loop recall", 30, loop_recall);
  criterion("GMS filter", 5, gms);
  criterion("loop correction", 60, loop_correction);
  criterion("evaluation exactness", 0, evaluation_exactness);
  criterion("end-to-end determinism", 0, determinism);
  criterion("dataset smoke test", 0, dataset_smoke);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
