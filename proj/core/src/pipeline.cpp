#include "mvskel/pipeline.hpp"

#include "mvskel/io.hpp"
#include "mvskel/parallel.hpp"
#include "mvskel/part_graph.hpp"
#include "mvskel/rig_design.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

namespace mvskel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_file(const std::string& dir, const char* stem, int frame,
                       const char* ext) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%06d.%s", stem, frame, ext);
  return (fs::path(dir) / name).string();
}

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from(const json& j) {
  return Point3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

}  // namespace

std::string resolve_path(const RunConfig& config, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  std::string base = config.data_dir;
  if (base.empty()) {
    if (const char* env = std::getenv("MVSKEL_DATA_DIR")) base = env;
  }
  if (base.empty()) return path;
  return (fs::path(base) / p).string();
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": malformed JSON (" + e.what() + ")");
  }
  if (doc.value("schema", "") != std::string("mvskel/config/1")) {
    throw std::runtime_error(path + ": expected schema \"mvskel/config/1\"");
  }

  RunConfig config;
  config.data_dir = doc.value("data_dir", config.data_dir);
  config.calibration_path = doc.value("calibration", config.calibration_path);
  config.scoremap_dir = doc.value("scoremaps", config.scoremap_dir);
  config.depth_dir = doc.value("depth", config.depth_dir);
  config.stream_path = doc.value("stream", config.stream_path);
  config.skeleton_path = doc.value("skeletons", config.skeleton_path);
  config.refined_path = doc.value("refined", config.refined_path);
  config.estimate_path = doc.value("estimate", config.estimate_path);
  config.reference_path = doc.value("reference", config.reference_path);
  config.output_dir = doc.value("output_dir", config.output_dir);
  if (doc.contains("grid")) {
    const json& grid = doc["grid"];
    config.grid_lo = point_from(grid.at("min"));
    config.grid_hi = point_from(grid.at("max"));
    config.voxel_size_m = grid.value("spacing", config.voxel_size_m);
  }
  if (doc.contains("thresholds")) {
    const json& t = doc["thresholds"];
    Thresholds& th = config.thresholds;
    th.tau = t.value("tau", th.tau);
    th.correspondence_px = t.value("correspondence_px", th.correspondence_px);
    th.rigidity_m = t.value("rigidity_m", th.rigidity_m);
    th.temporal_m = t.value("temporal_m", th.temporal_m);
    th.nms_radius_voxels = t.value("nms_radius_voxels", th.nms_radius_voxels);
    th.propagation_window = t.value("propagation_window", th.propagation_window);
    th.depth_margin_m = t.value("depth_margin_m", th.depth_margin_m);
    th.max_part_length_m = t.value("max_part_length_m", th.max_part_length_m);
    th.torso_max_length_m = t.value("torso_max_length_m", th.torso_max_length_m);
    th.prune_by_length = t.value("prune_by_length", th.prune_by_length);
    th.min_theta_factor = t.value("min_theta_factor", th.min_theta_factor);
    th.min_head_correspondences =
        t.value("min_head_correspondences", th.min_head_correspondences);
    th.max_frame_gap = t.value("max_frame_gap", th.max_frame_gap);
    th.refine_max_iterations =
        t.value("refine_max_iterations", th.refine_max_iterations);
  }
  config.stage = doc.value("stage", config.stage);
  config.workers = doc.value("workers", config.workers);
  config.seed = doc.value("seed", config.seed);
  if (doc.contains("pck_thresholds_cm")) {
    config.pck_thresholds_cm = doc["pck_thresholds_cm"].get<std::vector<double>>();
  }
  config.outlier_threshold_cm =
      doc.value("outlier_threshold_cm", config.outlier_threshold_cm);
  if (doc.contains("camera_sweep")) {
    config.camera_sweep = doc["camera_sweep"].get<std::vector<int>>();
  }
  config.cameras_subset = doc.value("cameras_subset", config.cameras_subset);
  if (doc.contains("scene")) {
    const json& s = doc["scene"];
    SceneConfig& scene = config.scene;
    scene.person_count = s.value("person_count", scene.person_count);
    scene.camera_count = s.value("camera_count", scene.camera_count);
    scene.dome_radius_m = s.value("dome_radius_m", scene.dome_radius_m);
    scene.frame_count = s.value("frame_count", scene.frame_count);
    scene.frame_rate_hz = s.value("frame_rate_hz", scene.frame_rate_hz);
    scene.detection_noise_px = s.value("detection_noise_px", scene.detection_noise_px);
    scene.detection_dropout = s.value("detection_dropout", scene.detection_dropout);
    scene.occlusion = s.value("occlusion", scene.occlusion);
    scene.depth_sensor_count = s.value("depth_sensor_count", scene.depth_sensor_count);
    scene.depth_width = s.value("depth_width", scene.depth_width);
    scene.depth_height = s.value("depth_height", scene.depth_height);
    scene.patches_per_bone = s.value("patches_per_bone", scene.patches_per_bone);
    scene.image_width = s.value("image_width", scene.image_width);
    scene.image_height = s.value("image_height", scene.image_height);
    scene.focal_px = s.value("focal_px", scene.focal_px);
    scene.blob_sigma_px = s.value("blob_sigma_px", scene.blob_sigma_px);
  }
  return config;
}

void save_run_config(const std::string& path, const RunConfig& config) {
  json doc{
      {"schema", "mvskel/config/1"},
      {"data_dir", config.data_dir},
      {"calibration", config.calibration_path},
      {"scoremaps", config.scoremap_dir},
      {"depth", config.depth_dir},
      {"stream", config.stream_path},
      {"skeletons", config.skeleton_path},
      {"refined", config.refined_path},
      {"estimate", config.estimate_path},
      {"reference", config.reference_path},
      {"output_dir", config.output_dir},
      {"grid",
       {{"min", point_json(config.grid_lo)},
        {"max", point_json(config.grid_hi)},
        {"spacing", config.voxel_size_m}}},
      {"thresholds",
       {{"tau", config.thresholds.tau},
        {"correspondence_px", config.thresholds.correspondence_px},
        {"rigidity_m", config.thresholds.rigidity_m},
        {"temporal_m", config.thresholds.temporal_m},
        {"nms_radius_voxels", config.thresholds.nms_radius_voxels},
        {"propagation_window", config.thresholds.propagation_window},
        {"depth_margin_m", config.thresholds.depth_margin_m},
        {"max_part_length_m", config.thresholds.max_part_length_m},
        {"torso_max_length_m", config.thresholds.torso_max_length_m},
        {"prune_by_length", config.thresholds.prune_by_length},
        {"min_theta_factor", config.thresholds.min_theta_factor},
        {"min_head_correspondences", config.thresholds.min_head_correspondences},
        {"max_frame_gap", config.thresholds.max_frame_gap},
        {"refine_max_iterations", config.thresholds.refine_max_iterations}}},
      {"stage", config.stage},
      {"workers", config.workers},
      {"seed", config.seed},
      {"pck_thresholds_cm", config.pck_thresholds_cm},
      {"outlier_threshold_cm", config.outlier_threshold_cm},
      {"camera_sweep", config.camera_sweep},
      {"cameras_subset", config.cameras_subset},
      {"scene",
       {{"person_count", config.scene.person_count},
        {"camera_count", config.scene.camera_count},
        {"dome_radius_m", config.scene.dome_radius_m},
        {"frame_count", config.scene.frame_count},
        {"frame_rate_hz", config.scene.frame_rate_hz},
        {"detection_noise_px", config.scene.detection_noise_px},
        {"detection_dropout", config.scene.detection_dropout},
        {"occlusion", config.scene.occlusion},
        {"depth_sensor_count", config.scene.depth_sensor_count},
        {"depth_width", config.scene.depth_width},
        {"depth_height", config.scene.depth_height},
        {"patches_per_bone", config.scene.patches_per_bone},
        {"image_width", config.scene.image_width},
        {"image_height", config.scene.image_height},
        {"focal_px", config.scene.focal_px},
        {"blob_sigma_px", config.scene.blob_sigma_px}}},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open config for writing");
  out << doc.dump(2) << '\n';
}

std::vector<SkeletonFrame> frames_from_trajectories(
    const std::vector<SkeletonTrajectory>& trajectories, int frame_count) {
  std::vector<SkeletonFrame> frames(frame_count);
  for (int f = 0; f < frame_count; ++f) frames[f].frame = f;
  for (const SkeletonTrajectory& trajectory : trajectories) {
    for (const auto& [frame, skeleton] : trajectory.frames) {
      if (frame < 0 || frame >= frame_count) continue;
      frames[frame].skeletons.push_back(skeleton);
    }
  }
  for (SkeletonFrame& frame : frames) {
    std::sort(frame.skeletons.begin(), frame.skeletons.end(),
              [](const Skeleton& a, const Skeleton& b) { return a.person < b.person; });
  }
  return frames;
}

std::vector<SkeletonTrajectory> trajectories_from_frames(
    const std::vector<SkeletonFrame>& frames) {
  std::map<int, SkeletonTrajectory> by_person;
  int synthetic_id = -1;
  for (std::size_t index = 0; index < frames.size(); ++index) {
    for (const Skeleton& skeleton : frames[index].skeletons) {
      int person = skeleton.person;
      if (person < 0) person = synthetic_id--;  // unassociated input
      auto& trajectory = by_person[person];
      trajectory.person = skeleton.person;
      trajectory.frames[static_cast<int>(index)] = skeleton;
    }
  }
  std::vector<SkeletonTrajectory> out;
  out.reserve(by_person.size());
  for (auto& [_, trajectory] : by_person) out.push_back(std::move(trajectory));
  return out;
}

std::vector<SkeletonFrame> reconstruct_frames(
    const std::vector<ScoreMapSet>& maps_per_frame,
    const std::vector<Camera>& cameras, const GridSpec& grid,
    const Thresholds& thresholds, int workers) {
  const SkeletonTopology topology = SkeletonTopology::default_topology();
  std::vector<SkeletonFrame> frames(maps_per_frame.size());

  AssemblyOptions assembly;
  assembly.tau = thresholds.tau;
  assembly.correspondence_radius_px = thresholds.correspondence_px;
  assembly.min_head_correspondences = thresholds.min_head_correspondences;
  assembly.min_theta_factor = thresholds.min_theta_factor;

  PartEnumerationOptions part_options;
  part_options.tau = thresholds.tau;
  part_options.prune_by_length = thresholds.prune_by_length;
  part_options.max_length_m = thresholds.max_part_length_m;
  part_options.torso_max_length_m = thresholds.torso_max_length_m;

  parallel_for(0, static_cast<std::int64_t>(maps_per_frame.size()), workers,
               [&](std::int64_t lo, std::int64_t hi) {
                 for (std::int64_t f = lo; f < hi; ++f) {
                   const ScoreMapSet& maps = maps_per_frame[f];
                   frames[f].frame = static_cast<int>(f);
                   if (maps.empty()) continue;
                   const ScoreVolume volume = fuse(maps, cameras, grid, 1);
                   const JointProposals proposals = extract_all_node_proposals(
                       volume, thresholds.tau, thresholds.nms_radius_voxels);
                   const PartPools parts = enumerate_parts(
                       proposals, topology, maps, cameras, part_options);
                   frames[f].skeletons = extract_skeletons(
                       proposals, parts, maps, cameras, topology, assembly);
                 }
               });
  return frames;
}

namespace {

std::vector<Camera> score_cameras(const std::vector<io::CalibrationEntry>& entries) {
  std::vector<Camera> cameras;
  for (const auto& entry : entries) {
    if (entry.kind == "score") cameras.push_back(entry.camera);
  }
  return cameras;
}

std::map<int, Camera> depth_sensors_by_id(
    const std::vector<io::CalibrationEntry>& entries) {
  std::map<int, Camera> sensors;
  for (const auto& entry : entries) {
    if (entry.kind == "depth") sensors[entry.camera.id] = entry.camera;
  }
  return sensors;
}

/// Sorted score-map files of a directory with their frame numbers.
std::vector<std::pair<int, std::string>> list_frame_files(const std::string& dir,
                                                          const char* ext) {
  if (!fs::exists(dir)) {
    throw std::runtime_error(dir + ": score map directory does not exist");
  }
  std::vector<std::pair<int, std::string>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ext) continue;
    const auto underscore = name.rfind('_');
    if (underscore == std::string::npos) continue;
    files.emplace_back(std::atoi(name.substr(underscore + 1).c_str()),
                       entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void check_blob_bounds(const ScoreMapSet& maps, const std::vector<Camera>& cameras,
                       const std::string& path) {
  std::map<int, const Camera*> by_id;
  for (const Camera& cam : cameras) by_id[cam.id] = &cam;
  for (const auto& [view_id, view] : maps.views()) {
    const auto it = by_id.find(view_id);
    if (it == by_id.end()) continue;  // views without calibration are ignored
    const Camera& cam = *it->second;
    for (const Detection& det : view.detections()) {
      for (const auto& blob : det.joints) {
        if (!blob) continue;
        if (blob->peak.x() < 0.0 || blob->peak.x() >= cam.width ||
            blob->peak.y() < 0.0 || blob->peak.y() >= cam.height) {
          throw std::runtime_error(path + ": blob peak outside image bounds in view " +
                                   std::to_string(view_id));
        }
      }
    }
  }
}

GridSpec grid_from_config(const RunConfig& config) {
  if ((config.grid_hi - config.grid_lo).minCoeff() <= 0.0) {
    throw std::runtime_error("config: grid bounds are not set");
  }
  return GridSpec::from_bounds(config.grid_lo, config.grid_hi, config.voxel_size_m);
}

std::vector<SkeletonFrame> ground_truth_frames(const GroundTruth& gt) {
  std::vector<SkeletonFrame> frames(gt.joints.size());
  for (std::size_t f = 0; f < gt.joints.size(); ++f) {
    frames[f].frame = static_cast<int>(f);
    for (std::size_t p = 0; p < gt.joints[f].size(); ++p) {
      Skeleton skeleton;
      skeleton.person = static_cast<int>(p);
      for (int j = 0; j < kJointCount; ++j) {
        SkeletonJoint& sj = skeleton.joints[j];
        sj.missing = false;
        sj.proposal = 0;
        sj.position = gt.joints[f][p][j];
        sj.voxel_position = sj.position;
        sj.score = 1.0;
      }
      frames[f].skeletons.push_back(std::move(skeleton));
    }
  }
  return frames;
}

}  // namespace

void cmd_synth(const RunConfig& config) {
  SceneConfig scene = config.scene;
  scene.seed = config.seed;
  const GroundTruth gt = generate(scene);

  const fs::path out(config.output_dir);
  fs::create_directories(out);
  fs::create_directories(out / "scoremaps");

  std::vector<io::CalibrationEntry> calibration;
  for (const Camera& cam : gt.cameras) calibration.push_back({cam, "score"});
  for (const Camera& cam : gt.depth_sensors) calibration.push_back({cam, "depth"});
  io::write_calibration((out / "calibration.json").string(), calibration);

  for (int f = 0; f < static_cast<int>(gt.score_maps.size()); ++f) {
    io::write_score_maps(frame_file((out / "scoremaps").string(), "frame", f, "json"),
                         gt.score_maps[f], f);
  }

  if (!gt.depth_maps.empty()) {
    fs::create_directories(out / "depth");
    for (int f = 0; f < static_cast<int>(gt.depth_maps.size()); ++f) {
      io::write_depth_maps(frame_file((out / "depth").string(), "frame", f, "bin"),
                           gt.depth_maps[f], f);
    }
  }

  if (!gt.patch_stream.empty()) {
    io::write_patch_stream((out / "stream.bin").string(), gt.patch_stream);
    std::vector<std::tuple<int, int, int>> labels;
    for (std::size_t i = 0; i < gt.patch_stream.size(); ++i) {
      labels.emplace_back(gt.patch_stream[i].id, gt.patch_labels[i].first,
                          gt.patch_labels[i].second);
    }
    io::write_stream_labels((out / "gt_stream_labels.json").string(), labels);
  }

  io::write_skeletons((out / "ground_truth.json").string(), ground_truth_frames(gt));

  RunConfig scene_config = config;
  scene_config.data_dir = "";
  scene_config.calibration_path = (out / "calibration.json").string();
  scene_config.scoremap_dir = (out / "scoremaps").string();
  scene_config.depth_dir =
      gt.depth_maps.empty() ? "" : (out / "depth").string();
  scene_config.stream_path =
      gt.patch_stream.empty() ? "" : (out / "stream.bin").string();
  scene_config.skeleton_path = (out / "skeletons_stage1.json").string();
  scene_config.refined_path = (out / "skeletons_stage2.json").string();
  scene_config.reference_path = (out / "ground_truth.json").string();
  scene_config.grid_lo = gt.grid_lo;
  scene_config.grid_hi = gt.grid_hi;
  save_run_config((out / "run_config.json").string(), scene_config);
}

void cmd_reconstruct(const RunConfig& config) {
  const auto calibration =
      io::read_calibration(resolve_path(config, config.calibration_path));
  std::vector<Camera> cameras = score_cameras(calibration);
  if (cameras.empty()) {
    throw std::runtime_error(config.calibration_path + ": no score cameras");
  }
  if (config.cameras_subset > 0) {
    cameras = sample_cameras(cameras, config.cameras_subset);
  }

  const GridSpec grid = grid_from_config(config);
  const auto files = list_frame_files(resolve_path(config, config.scoremap_dir),
                                      ".json");

  std::vector<ScoreMapSet> maps(files.size());
  std::vector<int> frame_numbers(files.size());
  parallel_for(0, static_cast<std::int64_t>(files.size()), config.workers,
               [&](std::int64_t lo, std::int64_t hi) {
                 for (std::int64_t i = lo; i < hi; ++i) {
                   int frame = 0;
                   maps[i] = io::read_score_maps(files[i].second, &frame);
                   frame_numbers[i] = frame;
                   check_blob_bounds(maps[i], cameras, files[i].second);
                 }
               });

  auto frames = reconstruct_frames(maps, cameras, grid, config.thresholds,
                                   config.workers);
  const auto trajectories = associate_time(
      [&] {
        std::vector<std::vector<Skeleton>> per_frame(frames.size());
        for (std::size_t i = 0; i < frames.size(); ++i) {
          per_frame[i] = frames[i].skeletons;
        }
        return per_frame;
      }(),
      config.thresholds.max_frame_gap, config.thresholds.temporal_m);

  auto output = frames_from_trajectories(trajectories, static_cast<int>(frames.size()));
  for (std::size_t i = 0; i < output.size(); ++i) output[i].frame = frame_numbers[i];

  fs::create_directories(config.output_dir);
  const std::string path =
      config.skeleton_path.empty()
          ? (fs::path(config.output_dir) / "skeletons_stage1.json").string()
          : resolve_path(config, config.skeleton_path);
  io::write_skeletons(path, output);
}

void cmd_refine(const RunConfig& config) {
  const std::string skeleton_path = resolve_path(config, config.skeleton_path);
  const auto input_frames = io::read_skeletons(skeleton_path);
  const auto stream = io::read_patch_stream(resolve_path(config, config.stream_path));

  const int frame_count = static_cast<int>(input_frames.size());
  auto trajectories = trajectories_from_frames(input_frames);

  const SkeletonTopology topology = SkeletonTopology::default_topology();
  auto parts = make_part_trajectories(trajectories, topology, frame_count);

  // Depth-based outlier removal is optional: without depth maps the step is
  // skipped with a warning and the rest proceeds.
  const std::string depth_dir = resolve_path(config, config.depth_dir);
  if (!depth_dir.empty() && fs::exists(depth_dir)) {
    const auto calibration =
        io::read_calibration(resolve_path(config, config.calibration_path));
    const auto sensors = depth_sensors_by_id(calibration);
    std::vector<std::vector<DepthMap>> depth(frame_count);
    for (const auto& [frame, path] : list_frame_files(depth_dir, ".bin")) {
      if (frame < 0 || frame >= frame_count) continue;
      depth[frame] = io::read_depth_maps(path, sensors);
    }
    remove_outlier_parts(parts, depth, config.thresholds.depth_margin_m);
  } else {
    std::cerr << "warning: no depth maps; skipping outlier part removal\n";
  }

  const std::vector<PartTrajectory> before = parts;

  RefineParameters params;
  params.propagation_window = config.thresholds.propagation_window;
  params.max_iterations = config.thresholds.refine_max_iterations;
  params.association.rigidity_threshold_m = config.thresholds.rigidity_m;
  const auto refined = refine_parts(parts, stream, params);

  apply_part_trajectories(trajectories, refined, topology);

  auto output = frames_from_trajectories(trajectories, frame_count);
  for (std::size_t i = 0; i < output.size() && i < input_frames.size(); ++i) {
    output[i].frame = input_frames[i].frame;
  }

  fs::create_directories(config.output_dir);
  const std::string refined_path =
      config.refined_path.empty()
          ? (fs::path(config.output_dir) / "skeletons_stage2.json").string()
          : resolve_path(config, config.refined_path);
  io::write_skeletons(refined_path, output);

  std::vector<std::tuple<int, int, int>> labels;
  for (const PartTrajectory& part : refined) {
    for (int patch : part.patches) {
      labels.emplace_back(patch, part.person, part.bone);
    }
  }
  std::sort(labels.begin(), labels.end());
  io::write_stream_labels(
      (fs::path(config.output_dir) / "labeled_stream.json").string(), labels);

  json fills = json::array();
  for (std::size_t p = 0; p < refined.size(); ++p) {
    json filled = json::array();
    for (int t = 0; t < refined[p].frame_count(); ++t) {
      if (!before[p].present(t) && refined[p].present(t)) filled.push_back(t);
    }
    if (!filled.empty()) {
      fills.push_back({{"person", refined[p].person},
                       {"bone", refined[p].bone},
                       {"frames", filled}});
    }
  }
  std::ofstream report((fs::path(config.output_dir) / "refine_report.json").string(),
                       std::ios::binary);
  report << json{{"schema", "mvskel/refine-report/1"}, {"filled", fills}}.dump(2)
         << '\n';
}

void cmd_eval(const RunConfig& config) {
  const std::string reference_path = resolve_path(config, config.reference_path);
  const auto reference = io::read_skeletons(reference_path);
  fs::create_directories(config.output_dir);

  if (!config.camera_sweep.empty()) {
    const auto calibration =
        io::read_calibration(resolve_path(config, config.calibration_path));
    const auto all_cameras = score_cameras(calibration);
    const GridSpec grid = grid_from_config(config);
    const auto files = list_frame_files(resolve_path(config, config.scoremap_dir),
                                        ".json");
    std::vector<ScoreMapSet> maps(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
      maps[i] = io::read_score_maps(files[i].second);
    }

    std::vector<int> sweep = config.camera_sweep;
    std::sort(sweep.begin(), sweep.end());
    std::vector<PckCurve> curves;
    for (int k : sweep) {
      const auto subset = sample_cameras(all_cameras, k);
      const auto frames =
          reconstruct_frames(maps, subset, grid, config.thresholds, config.workers);
      const auto curve = pck(frames, reference, config.pck_thresholds_cm);
      curves.push_back(curve);
      char name[64];
      std::snprintf(name, sizeof(name), "pck_cameras_%04d.csv", k);
      io::write_pck_csv((fs::path(config.output_dir) / name).string(), curve);
    }
    io::write_pck_summary_csv(
        (fs::path(config.output_dir) / "sweep_summary.csv").string(),
        config.pck_thresholds_cm, curves, sweep);
    return;
  }

  const std::string estimate_path = resolve_path(
      config, config.estimate_path.empty() ? config.skeleton_path
                                           : config.estimate_path);
  const auto estimate = io::read_skeletons(estimate_path);
  const EvalReport report = evaluate(estimate, reference, config.pck_thresholds_cm,
                                     config.outlier_threshold_cm);
  io::write_eval_report((fs::path(config.output_dir) / "report.json").string(),
                        report);
  io::write_pck_csv((fs::path(config.output_dir) / "pck_curve.csv").string(),
                    report.curve);
  io::write_pck_summary_csv(
      (fs::path(config.output_dir) / "pck_summary.csv").string(),
      config.pck_thresholds_cm, {report.curve});
  std::cout << io::render_report_table(report);
}

void cmd_rig_optimize(const RunConfig& config) {
  const RigLayout initial = default_rig_layout();
  const double objective_initial = placement_objective(initial);
  std::vector<double> history;
  const RigLayout optimized = optimize_placement(initial, 400, 1e-10, &history);
  const double objective_final = placement_objective(optimized);
  const BaselineStats baselines = report_baselines(optimized);

  fs::create_directories(config.output_dir);
  std::vector<io::CalibrationEntry> entries;
  for (const Camera& cam : rig_cameras(optimized)) entries.push_back({cam, "score"});
  io::write_calibration((fs::path(config.output_dir) / "rig_layout.json").string(),
                        entries);

  std::ofstream report((fs::path(config.output_dir) / "rig_report.json").string(),
                       std::ios::binary);
  report << json{{"schema", "mvskel/rig-report/1"},
                 {"objective_initial", objective_initial},
                 {"objective_final", objective_final},
                 {"accepted_steps", history.empty() ? 0 : history.size() - 1},
                 {"baseline_min_m", baselines.min_m},
                 {"baseline_mean_m", baselines.mean_m},
                 {"baseline_max_m", baselines.max_m}}
                .dump(2)
         << '\n';

  std::cout << "rig objective: " << objective_initial << " -> " << objective_final
            << "\nmin 3-neighbor baseline: " << baselines.min_m
            << " m (reference dome build quotes 0.2105 m)\n";
}

}  // namespace mvskel
