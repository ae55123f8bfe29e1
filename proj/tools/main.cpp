#include "mvskel/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
  return out;
}

struct CliState {
  std::string config_path;
  std::string thresholds_csv;
  std::string sweep_csv;
  std::string grid_min_csv;
  std::string grid_max_csv;
  mvskel::RunConfig overrides;  // flag values land here
  bool occlusion = false;

  // Present flags, tracked so config-file values survive unset options.
  CLI::App* sub = nullptr;
};

void add_common(CLI::App* sub, CliState& state) {
  sub->add_option("--config", state.config_path, "run-config JSON file");
  sub->add_option("--output-dir", state.overrides.output_dir, "output directory");
  sub->add_option("--workers", state.overrides.workers, "worker thread count");
  sub->add_option("--seed", state.overrides.seed, "random seed");
  sub->add_option("--stage", state.overrides.stage, "stage selection (1, 2, 0=all)");
  sub->add_option("--cameras-subset", state.overrides.cameras_subset,
                  "reconstruct with the K furthest-point-sampled cameras");
  sub->add_option("--thresholds", state.thresholds_csv,
                  "PCK thresholds in cm, comma separated");
  sub->add_option("--data-dir", state.overrides.data_dir,
                  "base directory for relative paths (default $MVSKEL_DATA_DIR)");
}

mvskel::RunConfig assemble(const CliState& state) {
  mvskel::RunConfig config;
  if (!state.config_path.empty()) {
    config = mvskel::load_run_config(state.config_path);
  }
  const CLI::App* sub = state.sub;
  const auto passed = [&](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };

  if (passed("--output-dir")) config.output_dir = state.overrides.output_dir;
  if (passed("--workers")) config.workers = state.overrides.workers;
  if (passed("--seed")) config.seed = state.overrides.seed;
  if (passed("--stage")) config.stage = state.overrides.stage;
  if (passed("--cameras-subset")) config.cameras_subset = state.overrides.cameras_subset;
  if (passed("--data-dir")) config.data_dir = state.overrides.data_dir;
  if (!state.thresholds_csv.empty()) {
    config.pck_thresholds_cm = parse_doubles(state.thresholds_csv);
  }
  if (!state.sweep_csv.empty()) config.camera_sweep = parse_ints(state.sweep_csv);

  const auto maybe = [&](const std::string& flag, std::string& target,
                         const std::string& value) {
    if (passed(flag)) target = value;
  };
  maybe("--calibration", config.calibration_path, state.overrides.calibration_path);
  maybe("--scoremaps", config.scoremap_dir, state.overrides.scoremap_dir);
  maybe("--depth-dir", config.depth_dir, state.overrides.depth_dir);
  maybe("--stream", config.stream_path, state.overrides.stream_path);
  maybe("--skeletons", config.skeleton_path, state.overrides.skeleton_path);
  maybe("--refined", config.refined_path, state.overrides.refined_path);
  maybe("--estimate", config.estimate_path, state.overrides.estimate_path);
  maybe("--reference", config.reference_path, state.overrides.reference_path);

  if (!state.grid_min_csv.empty()) {
    const auto v = parse_doubles(state.grid_min_csv);
    if (v.size() == 3) config.grid_lo = mvskel::Point3(v[0], v[1], v[2]);
  }
  if (!state.grid_max_csv.empty()) {
    const auto v = parse_doubles(state.grid_max_csv);
    if (v.size() == 3) config.grid_hi = mvskel::Point3(v[0], v[1], v[2]);
  }
  if (passed("--voxel")) config.voxel_size_m = state.overrides.voxel_size_m;

  if (passed("--people")) config.scene.person_count = state.overrides.scene.person_count;
  if (passed("--cameras")) config.scene.camera_count = state.overrides.scene.camera_count;
  if (passed("--frames")) config.scene.frame_count = state.overrides.scene.frame_count;
  if (passed("--noise-px")) {
    config.scene.detection_noise_px = state.overrides.scene.detection_noise_px;
  }
  if (passed("--dropout")) {
    config.scene.detection_dropout = state.overrides.scene.detection_dropout;
  }
  if (passed("--occlusion")) config.scene.occlusion = state.occlusion;
  if (passed("--depth-sensors")) {
    config.scene.depth_sensor_count = state.overrides.scene.depth_sensor_count;
  }
  if (passed("--patches-per-bone")) {
    config.scene.patches_per_bone = state.overrides.scene.patches_per_bone;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view multi-person 3D skeleton reconstruction"};
  app.require_subcommand(1);

  CliState synth_state, reconstruct_state, refine_state, eval_state, rig_state;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene");
  add_common(synth, synth_state);
  synth->add_option("--people", synth_state.overrides.scene.person_count, "person count");
  synth->add_option("--cameras", synth_state.overrides.scene.camera_count, "camera count");
  synth->add_option("--frames", synth_state.overrides.scene.frame_count, "frame count");
  synth->add_option("--noise-px", synth_state.overrides.scene.detection_noise_px,
                    "detection pixel noise sigma");
  synth->add_option("--dropout", synth_state.overrides.scene.detection_dropout,
                    "per-view detection dropout probability");
  synth->add_flag("--occlusion", synth_state.occlusion, "enable torso occlusion model");
  synth->add_option("--depth-sensors", synth_state.overrides.scene.depth_sensor_count,
                    "depth sensor count");
  synth->add_option("--patches-per-bone", synth_state.overrides.scene.patches_per_bone,
                    "surface patches per bone");
  synth_state.sub = synth;

  CLI::App* reconstruct =
      app.add_subcommand("reconstruct", "Stage 1: skeletal proposals per frame");
  add_common(reconstruct, reconstruct_state);
  reconstruct->add_option("--calibration", reconstruct_state.overrides.calibration_path,
                          "calibration document");
  reconstruct->add_option("--scoremaps", reconstruct_state.overrides.scoremap_dir,
                          "score map directory");
  reconstruct->add_option("--skeletons", reconstruct_state.overrides.skeleton_path,
                          "output skeleton document");
  reconstruct->add_option("--grid-min", reconstruct_state.grid_min_csv, "x,y,z meters");
  reconstruct->add_option("--grid-max", reconstruct_state.grid_max_csv, "x,y,z meters");
  reconstruct->add_option("--voxel", reconstruct_state.overrides.voxel_size_m,
                          "voxel spacing in meters");
  reconstruct_state.sub = reconstruct;

  CLI::App* refine = app.add_subcommand("refine", "Stage 2: temporal refinement");
  add_common(refine, refine_state);
  refine->add_option("--calibration", refine_state.overrides.calibration_path,
                     "calibration document");
  refine->add_option("--skeletons", refine_state.overrides.skeleton_path,
                     "Stage-1 skeleton document");
  refine->add_option("--stream", refine_state.overrides.stream_path,
                     "patch trajectory stream");
  refine->add_option("--depth-dir", refine_state.overrides.depth_dir,
                     "depth raster directory");
  refine->add_option("--refined", refine_state.overrides.refined_path,
                     "output skeleton document");
  refine_state.sub = refine;

  CLI::App* eval = app.add_subcommand("eval", "PCK / accuracy evaluation");
  add_common(eval, eval_state);
  eval->add_option("--estimate", eval_state.overrides.estimate_path,
                   "estimated skeleton document");
  eval->add_option("--reference", eval_state.overrides.reference_path,
                   "reference skeleton document");
  eval->add_option("--sweep", eval_state.sweep_csv,
                   "camera counts for a furthest-point sweep, comma separated");
  eval->add_option("--calibration", eval_state.overrides.calibration_path,
                   "calibration document (sweep mode)");
  eval->add_option("--scoremaps", eval_state.overrides.scoremap_dir,
                   "score map directory (sweep mode)");
  eval_state.sub = eval;

  CLI::App* rig = app.add_subcommand("rig-optimize", "optimize dome camera placement");
  add_common(rig, rig_state);
  rig_state.sub = rig;

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      mvskel::cmd_synth(assemble(synth_state));
    } else if (reconstruct->parsed()) {
      mvskel::cmd_reconstruct(assemble(reconstruct_state));
    } else if (refine->parsed()) {
      mvskel::cmd_refine(assemble(refine_state));
    } else if (eval->parsed()) {
      mvskel::cmd_eval(assemble(eval_state));
    } else if (rig->parsed()) {
      mvskel::cmd_rig_optimize(assemble(rig_state));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
