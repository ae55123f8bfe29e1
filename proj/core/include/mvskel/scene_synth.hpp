#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/score_map.hpp"
#include "mvskel/trajectory_refine.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mvskel {

/// Parametric articulated motion for one synthetic person: sinusoidal limb
/// swings around a walking-in-place base with optional drift and sway.
struct PersonScript {
  Point3 base = Point3::Zero();  ///< ground position; z is ignored (floor)
  double heading_rad = 0.0;
  double walk_speed_mps = 0.0;
  double sway_amplitude_m = 0.0;
  double swing_amplitude_rad = 0.35;
  double swing_frequency_hz = 1.0;
  double phase_rad = 0.0;
};

struct SceneConfig {
  std::uint64_t seed = 1;
  int person_count = 1;
  /// One script per person; generated from the seed when empty.
  std::vector<PersonScript> scripts;

  int camera_count = 30;
  double dome_radius_m = 2.745;
  /// Cameras to use verbatim instead of sphere placement (e.g. an optimized
  /// rig layout).
  std::vector<Camera> camera_override;

  int frame_count = 30;
  double frame_rate_hz = 25.0;

  double detection_noise_px = 0.0;
  double detection_dropout = 0.0;  ///< per (view, person) probability
  bool occlusion = false;

  int depth_sensor_count = 0;
  int depth_width = 192;
  int depth_height = 144;

  int patches_per_bone = 0;

  int image_width = 640;
  int image_height = 480;
  double focal_px = 400.0;
  double blob_sigma_px = 3.0;
};

/// Everything the pipeline consumes plus the labels to score it against.
struct GroundTruth {
  SceneConfig config;
  std::vector<Camera> cameras;
  std::vector<Camera> depth_sensors;
  /// [frame][person][joint]
  std::vector<std::vector<std::array<Point3, kJointCount>>> joints;
  std::vector<ScoreMapSet> score_maps;            ///< per frame
  std::vector<std::vector<DepthMap>> depth_maps;  ///< per frame, per sensor
  std::vector<PatchTrajectory> patch_stream;
  /// Generating (person, bone) per patch, aligned with patch_stream.
  std::vector<std::pair<int, int>> patch_labels;
  /// Suggested reconstruction grid bounds (joint bounding box + margin).
  Point3 grid_lo = Point3::Zero();
  Point3 grid_hi = Point3::Zero();
};

/// Deterministic scene generation: the same config (including seed) yields
/// bit-identical output. Throws std::invalid_argument on malformed configs.
GroundTruth generate(const SceneConfig& config);

/// Failure-mode injector: re-emits the ground-truth score maps with all
/// left/right limb blobs exchanged in a per-(frame, view) coin flip with the
/// given probability. Deterministic under the scene seed.
std::vector<ScoreMapSet> perturb_detection_sides(const GroundTruth& gt,
                                                 double probability);

/// Capsule radius used for bodies, by bone index of the default topology.
double bone_capsule_radius(int bone);

/// True when the segment from `ray_origin` to `ray_end` passes within
/// `radius` of the capsule axis (a, b): the occlusion predicate.
bool capsule_blocks_segment(const Point3& ray_origin, const Point3& ray_end,
                            const Point3& a, const Point3& b, double radius);

/// Smallest camera-frame depth s >= 0 at which the ray origin + s * dir hits
/// the capsule surface, or nullopt. `dir` need not be normalized; s is in
/// units of |dir|.
std::optional<double> ray_capsule_depth(const Point3& origin, const Point3& dir,
                                        const Point3& a, const Point3& b,
                                        double radius);

/// Evenly spread unit directions (Fibonacci lattice), used as the candidate
/// pool for furthest-point camera placement.
std::vector<Point3> fibonacci_sphere(int count);

}  // namespace mvskel
