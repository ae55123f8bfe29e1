#include "mvskel/scene_synth.hpp"

#include "mvskel/rng.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvskel {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFloorZ = -1.40;  // dome floor sits 1.40 m below the center

/// Rest offsets of each bone's child in the bone frame, indexed per the
/// default topology bone order.
const std::array<Point3, kJointCount - 1>& bone_rest_offsets() {
  static const std::array<Point3, kJointCount - 1> offsets = {{
      {0.0, 0.0, 0.25},    // Neck -> HeadTop
      {0.0, 0.0, -0.50},   // Neck -> BodyCenter
      {0.0, 0.20, -0.05},  // Neck -> ShoulderL
      {0.0, -0.20, -0.05}, // Neck -> ShoulderR
      {0.0, 0.0, -0.30},   // ShoulderL -> ElbowL
      {0.0, 0.0, -0.26},   // ElbowL -> WristL
      {0.0, 0.0, -0.30},   // ShoulderR -> ElbowR
      {0.0, 0.0, -0.26},   // ElbowR -> WristR
      {0.0, 0.10, 0.0},    // BodyCenter -> HipL
      {0.0, 0.0, -0.45},   // HipL -> KneeL
      {0.0, 0.0, -0.43},   // KneeL -> AnkleL
      {0.0, -0.10, 0.0},   // BodyCenter -> HipR
      {0.0, 0.0, -0.45},   // HipR -> KneeR
      {0.0, 0.0, -0.43},   // KneeR -> AnkleR
  }};
  return offsets;
}

constexpr std::array<double, kJointCount - 1> kCapsuleRadii = {
    0.10,   // head
    0.15,   // torso
    0.06,   // clavicle L
    0.06,   // clavicle R
    0.05,   // upper arm L
    0.045,  // forearm L
    0.05,   // upper arm R
    0.045,  // forearm R
    0.09,   // pelvis L
    0.07,   // thigh L
    0.055,  // shin L
    0.09,   // pelvis R
    0.07,   // thigh R
    0.055,  // shin R
};

Mat3 rot_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return m;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return m;
}

struct BodyPose {
  std::array<Point3, kJointCount> joints;
  /// Global rotation of each bone frame, per default-topology bone order.
  std::array<Mat3, kJointCount - 1> bone_rotations;
};

/// Closed-form forward kinematics for one person at time t.
BodyPose pose_at(const PersonScript& script, double t) {
  const double omega = 2.0 * kPi * script.swing_frequency_hz;
  const double phase = omega * t + script.phase_rad;

  const double arm_l = script.swing_amplitude_rad * std::sin(phase);
  const double arm_r = -arm_l;
  const double elbow_l = 0.35 * script.swing_amplitude_rad * (1.0 + std::sin(phase + 0.9));
  const double elbow_r = 0.35 * script.swing_amplitude_rad * (1.0 + std::sin(phase + 0.9 + kPi));
  const double leg_l = -0.8 * script.swing_amplitude_rad * std::sin(phase);
  const double leg_r = -leg_l;
  const double knee_l = 0.45 * script.swing_amplitude_rad * (1.0 + std::sin(phase + kPi / 2));
  const double knee_r = 0.45 * script.swing_amplitude_rad * (1.0 + std::sin(phase + kPi / 2 + kPi));

  const Mat3 root = rot_z(script.heading_rad);
  const Point3 drift = root * Point3(script.walk_speed_mps * t,
                                     script.sway_amplitude_m * std::sin(phase), 0.0);
  const Point3 base(script.base.x() + drift.x(), script.base.y() + drift.y(), kFloorZ);

  BodyPose pose;
  auto& r = pose.bone_rotations;
  r[0] = root;                      // head
  r[1] = root;                      // torso
  r[2] = root;                      // clavicle L
  r[3] = root;                      // clavicle R
  r[4] = root * rot_y(arm_l);       // upper arm L
  r[5] = r[4] * rot_y(elbow_l);     // forearm L
  r[6] = root * rot_y(arm_r);       // upper arm R
  r[7] = r[6] * rot_y(elbow_r);     // forearm R
  r[8] = root;                      // pelvis L
  r[9] = root * rot_y(leg_l);       // thigh L
  r[10] = r[9] * rot_y(knee_l);     // shin L
  r[11] = root;                     // pelvis R
  r[12] = root * rot_y(leg_r);      // thigh R
  r[13] = r[12] * rot_y(knee_r);    // shin R

  auto& j = pose.joints;
  const auto& offsets = bone_rest_offsets();
  j[joint_index(JointId::Neck)] = base + root * Point3(0.0, 0.0, 1.45);
  const SkeletonTopology& topology = SkeletonTopology::default_topology();
  for (int b = 0; b < topology.bone_count(); ++b) {
    const Bone& bone = topology.bones()[b];
    j[joint_index(bone.child)] =
        j[joint_index(bone.parent)] + r[b] * offsets[b];
  }
  return pose;
}

std::vector<PersonScript> default_scripts(const SceneConfig& config) {
  std::vector<PersonScript> scripts;
  Rng rng = Rng(config.seed).fork(0xdefa);
  const int n = config.person_count;
  const double ring = n <= 1 ? 0.0 : 0.45 + 0.12 * n;
  for (int p = 0; p < n; ++p) {
    PersonScript s;
    const double angle = 2.0 * kPi * p / std::max(n, 1);
    s.base = Point3(ring * std::cos(angle), ring * std::sin(angle), 0.0);
    s.heading_rad = angle + kPi;  // face the center
    s.sway_amplitude_m = rng.uniform(0.02, 0.05);
    s.swing_amplitude_rad = rng.uniform(0.25, 0.45);
    s.swing_frequency_hz = rng.uniform(0.8, 1.2);
    s.phase_rad = rng.uniform(0.0, 2.0 * kPi);
    scripts.push_back(s);
  }
  return scripts;
}

}  // namespace

double bone_capsule_radius(int bone) { return kCapsuleRadii[bone]; }

std::vector<Point3> fibonacci_sphere(int count) {
  std::vector<Point3> dirs;
  dirs.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double theta = golden * i;
    dirs.emplace_back(r * std::cos(theta), r * std::sin(theta), z);
  }
  return dirs;
}

namespace {

/// Greedy max-min spread over the candidate directions.
std::vector<Point3> spread_directions(int count, double min_z) {
  std::vector<Point3> candidates;
  for (const Point3& d : fibonacci_sphere(4096)) {
    if (d.z() >= min_z) candidates.push_back(d);
  }
  if (count > static_cast<int>(candidates.size())) {
    throw std::invalid_argument("camera count exceeds placement candidates");
  }
  std::vector<Point3> chosen;
  std::vector<double> dist(candidates.size(),
                           std::numeric_limits<double>::infinity());
  std::size_t next = 0;  // deterministic seed: first candidate
  for (int k = 0; k < count; ++k) {
    chosen.push_back(candidates[next]);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      dist[i] = std::min(dist[i], (candidates[i] - chosen.back()).norm());
    }
    next = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (dist[i] > dist[next]) next = i;
    }
  }
  return chosen;
}

struct CapsuleShape {
  Point3 a;
  Point3 b;
  double radius;
};

std::vector<CapsuleShape> body_capsules(const BodyPose& pose,
                                        const SkeletonTopology& topology) {
  std::vector<CapsuleShape> capsules;
  capsules.reserve(topology.bone_count());
  for (int b = 0; b < topology.bone_count(); ++b) {
    const Bone& bone = topology.bones()[b];
    capsules.push_back({pose.joints[joint_index(bone.parent)],
                        pose.joints[joint_index(bone.child)], kCapsuleRadii[b]});
  }
  return capsules;
}

double segment_segment_distance(const Point3& p0, const Point3& p1,
                                const Point3& q0, const Point3& q1) {
  // Standard closest-point computation between two segments.
  const Point3 d1 = p1 - p0;
  const Point3 d2 = q1 - q0;
  const Point3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-18 && e <= 1e-18) {
    return r.norm();
  }
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > 1e-18) {
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      }
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
}

}  // namespace

bool capsule_blocks_segment(const Point3& ray_origin, const Point3& ray_end,
                            const Point3& a, const Point3& b, double radius) {
  return segment_segment_distance(ray_origin, ray_end, a, b) < radius;
}

std::optional<double> ray_capsule_depth(const Point3& origin, const Point3& dir,
                                        const Point3& a, const Point3& b,
                                        double radius) {
  double best = std::numeric_limits<double>::infinity();

  const Point3 ab = b - a;
  const double len = ab.norm();
  const Point3 axis = len > 0.0 ? Point3(ab / len) : Point3::UnitZ();

  // Sphere caps: accept hits whose axial coordinate falls outside the
  // cylinder span on the matching side.
  for (int cap = 0; cap < 2; ++cap) {
    const Point3& c = cap == 0 ? a : b;
    const Point3 oc = origin - c;
    const double qa = dir.squaredNorm();
    const double qb = 2.0 * dir.dot(oc);
    const double qc = oc.squaredNorm() - radius * radius;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
      if (s < 0.0 || s >= best) continue;
      const double axial = ((origin + s * dir) - a).dot(axis);
      if ((cap == 0 && axial <= 0.0) || (cap == 1 && axial >= len)) {
        best = s;
      }
    }
  }

  // Infinite cylinder clipped to the axial span.
  if (len > 0.0) {
    const Point3 m = (origin - a) - ((origin - a).dot(axis)) * axis;
    const Point3 n = dir - (dir.dot(axis)) * axis;
    const double qa = n.squaredNorm();
    if (qa > 1e-18) {
      const double qb = 2.0 * m.dot(n);
      const double qc = m.squaredNorm() - radius * radius;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
          if (s < 0.0 || s >= best) continue;
          const double axial = ((origin + s * dir) - a).dot(axis);
          if (axial >= 0.0 && axial <= len) best = s;
        }
      }
    }
  }

  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

namespace {

DepthMap render_depth(const Camera& sensor, int frame,
                      const std::vector<std::vector<CapsuleShape>>& capsules_per_person) {
  DepthMap map;
  map.sensor = sensor;
  map.frame = frame;
  map.width = sensor.width;
  map.height = sensor.height;
  map.depth.assign(static_cast<std::size_t>(sensor.width) * sensor.height, 0.0f);

  const Point3 origin = sensor.center();
  const Mat3 rt = sensor.rotation.transpose();
  const Mat3& k = sensor.intrinsics;
  for (int v = 0; v < sensor.height; ++v) {
    for (int u = 0; u < sensor.width; ++u) {
      // Direction scaled so the parameter equals camera-frame depth.
      const double yn = (v - k(1, 2)) / k(1, 1);
      const double xn = (u - k(0, 2) - k(0, 1) * yn) / k(0, 0);
      const Point3 dir = rt * Point3(xn, yn, 1.0);
      double depth = std::numeric_limits<double>::infinity();
      for (const auto& person : capsules_per_person) {
        for (const CapsuleShape& capsule : person) {
          const auto s = ray_capsule_depth(origin, dir, capsule.a, capsule.b,
                                           capsule.radius);
          if (s && *s < depth) depth = *s;
        }
      }
      if (std::isfinite(depth)) {
        map.depth[static_cast<std::size_t>(v) * map.width + u] =
            static_cast<float>(depth);
      }
    }
  }
  return map;
}

}  // namespace

GroundTruth generate(const SceneConfig& config) {
  if (config.person_count < 0 || config.camera_count < 0 ||
      config.frame_count < 0 || config.depth_sensor_count < 0 ||
      config.patches_per_bone < 0) {
    throw std::invalid_argument("scene config: counts must be non-negative");
  }
  if (config.frame_rate_hz <= 0.0 || config.dome_radius_m <= 0.0 ||
      config.blob_sigma_px <= 0.0 || config.focal_px <= 0.0) {
    throw std::invalid_argument("scene config: rates and sizes must be positive");
  }
  if (!config.scripts.empty() &&
      static_cast<int>(config.scripts.size()) != config.person_count) {
    throw std::invalid_argument("scene config: script count mismatches persons");
  }

  GroundTruth gt;
  gt.config = config;

  const SkeletonTopology topology = SkeletonTopology::default_topology();
  const std::vector<PersonScript> scripts =
      config.scripts.empty() ? default_scripts(config) : config.scripts;

  // Cameras: furthest-point spread on the dome sphere, aimed at the center.
  if (!config.camera_override.empty()) {
    gt.cameras = config.camera_override;
  } else {
    const auto dirs = spread_directions(config.camera_count, -0.45);
    for (int i = 0; i < config.camera_count; ++i) {
      gt.cameras.push_back(make_look_at_camera(
          i, dirs[i] * config.dome_radius_m, Point3::Zero(), config.focal_px,
          config.image_width, config.image_height));
    }
  }

  // Depth sensors: two rings, matching the paper's mounting heights.
  if (config.depth_sensor_count > 0) {
    const int low = (config.depth_sensor_count + 1) / 2;
    const double focal = 0.85 * config.depth_width;
    int sensor_id = static_cast<int>(gt.cameras.size());
    for (int i = 0; i < config.depth_sensor_count; ++i) {
      const bool lower = i < low;
      const double z = lower ? kFloorZ + 1.0 : kFloorZ + 2.6;
      const int in_ring = lower ? low : config.depth_sensor_count - low;
      const int pos = lower ? i : i - low;
      const double angle =
          2.0 * kPi * pos / std::max(in_ring, 1) + (lower ? 0.0 : kPi / 5.0);
      const double ring_r =
          std::sqrt(std::max(0.01, config.dome_radius_m * config.dome_radius_m - z * z));
      const Point3 position(ring_r * std::cos(angle), ring_r * std::sin(angle), z);
      gt.depth_sensors.push_back(make_look_at_camera(
          sensor_id++, position, Point3(0.0, 0.0, -0.4), focal,
          config.depth_width, config.depth_height));
    }
  }

  // Kinematics for every frame.
  std::vector<std::vector<BodyPose>> poses(config.frame_count);
  gt.joints.resize(config.frame_count);
  for (int f = 0; f < config.frame_count; ++f) {
    const double t = f / config.frame_rate_hz;
    poses[f].reserve(scripts.size());
    for (const PersonScript& script : scripts) {
      poses[f].push_back(pose_at(script, t));
      gt.joints[f].push_back(poses[f].back().joints);
    }
  }

  // Grid suggestion: bounding box of all joints plus margin.
  Point3 lo(-1.0, -1.0, kFloorZ);
  Point3 hi(1.0, 1.0, 0.5);
  for (const auto& frame : gt.joints) {
    for (const auto& person : frame) {
      for (const Point3& p : person) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    }
  }
  gt.grid_lo = lo - Point3::Constant(0.35);
  gt.grid_hi = hi + Point3::Constant(0.35);

  const Rng root_rng(config.seed);

  // Score maps: one detection per visible person per view.
  gt.score_maps.resize(config.frame_count);
  for (int f = 0; f < config.frame_count; ++f) {
    ScoreMapSet& maps = gt.score_maps[f];
    std::vector<std::vector<CapsuleShape>> capsules;
    capsules.reserve(poses[f].size());
    for (const BodyPose& pose : poses[f]) {
      capsules.push_back(body_capsules(pose, topology));
    }
    for (const Camera& cam : gt.cameras) {
      int detection = 0;
      for (int p = 0; p < static_cast<int>(poses[f].size()); ++p) {
        Rng rng = root_rng.fork(
            (static_cast<std::uint64_t>(f) * 1000003u + cam.id) * 1000003u + p);
        if (config.detection_dropout > 0.0 && rng.bernoulli(config.detection_dropout)) {
          continue;
        }
        bool emitted = false;
        for (int j = 0; j < kJointCount; ++j) {
          const Point3& joint = poses[f][p].joints[j];
          if (!is_visible(cam, joint)) continue;
          if (config.occlusion) {
            // A torso capsule of any other person blocking the view ray
            // suppresses this joint's detection.
            const Point3 eye = cam.center();
            bool blocked = false;
            for (int q = 0; q < static_cast<int>(poses[f].size()) && !blocked; ++q) {
              if (q == p) continue;
              const CapsuleShape& torso = capsules[q][topology.torso_bone()];
              blocked = capsule_blocks_segment(eye, joint, torso.a, torso.b,
                                               torso.radius);
            }
            if (blocked) continue;
          }
          Point2 pixel = project(cam, joint);
          if (config.detection_noise_px > 0.0) {
            pixel.x() += config.detection_noise_px * rng.normal();
            pixel.y() += config.detection_noise_px * rng.normal();
          }
          if (pixel.x() < 0.0 || pixel.x() >= cam.width || pixel.y() < 0.0 ||
              pixel.y() >= cam.height) {
            continue;
          }
          DetectionBlob blob;
          blob.view = cam.id;
          blob.detection = detection;
          blob.joint = static_cast<JointId>(j);
          blob.peak = pixel;
          blob.amplitude = 1.0;
          blob.sigma_px = config.blob_sigma_px;
          maps.add(blob);
          emitted = true;
        }
        if (emitted) ++detection;
      }
    }
  }

  // Depth maps: ray-cast against all body capsules.
  if (!gt.depth_sensors.empty()) {
    gt.depth_maps.resize(config.frame_count);
    for (int f = 0; f < config.frame_count; ++f) {
      std::vector<std::vector<CapsuleShape>> capsules;
      capsules.reserve(poses[f].size());
      for (const BodyPose& pose : poses[f]) {
        capsules.push_back(body_capsules(pose, topology));
      }
      for (const Camera& sensor : gt.depth_sensors) {
        gt.depth_maps[f].push_back(render_depth(sensor, f, capsules));
      }
    }
  }

  // Patch trajectories: surface samples rigidly attached to their bone.
  if (config.patches_per_bone > 0 && config.frame_count > 0) {
    const auto& offsets = bone_rest_offsets();
    int patch_id = 0;
    for (int p = 0; p < static_cast<int>(scripts.size()); ++p) {
      for (int b = 0; b < topology.bone_count(); ++b) {
        Rng rng = root_rng.fork(0xfa7c000000ull +
                                static_cast<std::uint64_t>(p) * 64 + b);
        const Point3 axis = offsets[b];
        const double axis_len = axis.norm();
        if (axis_len < 1e-9) continue;
        const Point3 az = axis / axis_len;
        Point3 ref = std::abs(az.x()) < 0.9 ? Point3::UnitX() : Point3::UnitY();
        const Point3 n1 = (ref - ref.dot(az) * az).normalized();
        const Point3 n2 = az.cross(n1);
        for (int k = 0; k < config.patches_per_bone; ++k) {
          const double frac = rng.uniform(0.15, 0.85);
          const double psi = rng.uniform(0.0, 2.0 * kPi);
          const Point3 radial = std::cos(psi) * n1 + std::sin(psi) * n2;
          const Point3 local = frac * axis + kCapsuleRadii[b] * radial;

          PatchTrajectory trajectory;
          trajectory.id = patch_id++;
          trajectory.start_frame = 0;
          trajectory.centers.reserve(config.frame_count);
          trajectory.normals.reserve(config.frame_count);
          const int parent = joint_index(topology.bones()[b].parent);
          for (int f = 0; f < config.frame_count; ++f) {
            const BodyPose& pose = poses[f][p];
            trajectory.centers.push_back(pose.joints[parent] +
                                         pose.bone_rotations[b] * local);
            trajectory.normals.push_back(pose.bone_rotations[b] * radial);
          }
          gt.patch_stream.push_back(std::move(trajectory));
          gt.patch_labels.emplace_back(p, b);
        }
      }
    }
  }

  return gt;
}

std::vector<ScoreMapSet> perturb_detection_sides(const GroundTruth& gt,
                                                 double probability) {
  const Rng root_rng(gt.config.seed);
  std::vector<ScoreMapSet> out;
  out.reserve(gt.score_maps.size());
  for (int f = 0; f < static_cast<int>(gt.score_maps.size()); ++f) {
    ScoreMapSet maps;
    for (const auto& [view_id, view] : gt.score_maps[f].views()) {
      Rng rng = root_rng.fork(0x51de000000ull +
                              static_cast<std::uint64_t>(f) * 100003u + view_id);
      const bool swap = probability > 0.0 && rng.bernoulli(probability);
      for (int i = 0; i < view.detection_count(); ++i) {
        std::array<std::optional<DetectionBlob>, kJointCount> joints =
            view.detections()[i].joints;
        if (swap) {
          for (const auto& [left, right] : left_right_pairs()) {
            std::swap(joints[joint_index(left)], joints[joint_index(right)]);
          }
        }
        for (int j = 0; j < kJointCount; ++j) {
          if (!joints[j]) continue;
          DetectionBlob blob = *joints[j];
          blob.joint = static_cast<JointId>(j);  // relabel swapped blobs
          maps.add(blob);
        }
      }
    }
    out.push_back(std::move(maps));
  }
  return out;
}

}  // namespace mvskel
