#pragma once

#include "mvskel/eval.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/scene_synth.hpp"
#include "mvskel/score_fusion.hpp"
#include "mvskel/skeleton_assembly.hpp"
#include "mvskel/trajectory_refine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mvskel {

/// The paper-stated constants plus this artifact's engineering guards; every
/// default is overridable through the config file and CLI flags.
struct Thresholds {
  double tau = 0.05;                   ///< node / connectivity score threshold
  double correspondence_px = 10.0;     ///< delta: 2D claiming radius
  double rigidity_m = 0.10;            ///< patch-to-part association bound
  double temporal_m = 0.30;            ///< head association distance per gap frame
  int nms_radius_voxels = 2;           ///< proposal suppression radius
  int propagation_window = 1;          ///< n of the propagated-proposal set
  double depth_margin_m = 0.05;        ///< free-space margin for outlier parts
  double max_part_length_m = 1.0;      ///< length prior (1.5 for the torso)
  double torso_max_length_m = 1.5;
  bool prune_by_length = true;
  double min_theta_factor = 14.0;      ///< greedy stop at theta < factor * tau
  int min_head_correspondences = 2;
  int max_frame_gap = 2;
  int refine_max_iterations = 10;      ///< Stage-2 fill-in iteration cap
};

struct RunConfig {
  // Inputs; relative paths resolve against data_dir (or $MVSKEL_DATA_DIR).
  std::string data_dir;
  std::string calibration_path;
  std::string scoremap_dir;
  std::string depth_dir;
  std::string stream_path;
  std::string skeleton_path;   ///< Stage-1 output / Stage-2 and eval input
  std::string refined_path;    ///< Stage-2 output
  std::string estimate_path;   ///< eval estimate (defaults to skeleton_path)
  std::string reference_path;  ///< eval reference
  std::string output_dir = ".";

  Point3 grid_lo = Point3::Zero();
  Point3 grid_hi = Point3::Zero();
  double voxel_size_m = 0.04;

  Thresholds thresholds;
  int stage = 0;  ///< 1, 2, or 0 = all
  int workers = 1;
  std::uint64_t seed = 1;
  std::vector<double> pck_thresholds_cm = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double outlier_threshold_cm = 5.0;
  std::vector<int> camera_sweep;  ///< eval sweep camera counts
  int cameras_subset = 0;         ///< 0 = all cameras

  SceneConfig scene;  ///< cmd_synth parameters (seed overridden by `seed`)
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);

/// Resolves a config-relative path. Relative inputs are joined onto
/// config.data_dir when set, else onto $MVSKEL_DATA_DIR when set.
std::string resolve_path(const RunConfig& config, const std::string& path);

/// Generates a synthetic scene and writes every pipeline input file plus the
/// ground truth and a ready-to-run config into config.output_dir.
void cmd_synth(const RunConfig& config);

/// Stage 1 end to end: score maps -> volumes -> proposals -> parts -> DP
/// skeletons -> temporal association; writes the skeleton document.
/// Deterministic: byte-identical output for any worker count.
void cmd_reconstruct(const RunConfig& config);

/// Stage 2: associates the patch stream to part trajectories, removes
/// depth-contradicted parts, propagates and averages; writes the refined
/// skeleton document, the per-patch labels, and a fill report.
void cmd_refine(const RunConfig& config);

/// PCK / accuracy evaluation of an estimate against a reference, with an
/// optional furthest-point camera sweep re-running Stage 1 per subset.
void cmd_eval(const RunConfig& config);

/// Optimizes the dome camera placement and writes the layout (calibration
/// format) plus a baseline report.
void cmd_rig_optimize(const RunConfig& config);

/// In-memory Stage-1 reconstruction, shared by cmd_reconstruct and the eval
/// camera sweep.
std::vector<SkeletonFrame> reconstruct_frames(
    const std::vector<ScoreMapSet>& maps_per_frame,
    const std::vector<Camera>& cameras, const GridSpec& grid,
    const Thresholds& thresholds, int workers);

/// Frame-document helpers.
std::vector<SkeletonFrame> frames_from_trajectories(
    const std::vector<SkeletonTrajectory>& trajectories, int frame_count);
std::vector<SkeletonTrajectory> trajectories_from_frames(
    const std::vector<SkeletonFrame>& frames);

}  // namespace mvskel
