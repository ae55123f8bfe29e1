#include "mvskel/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mvskel::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

json load_json(const std::string& path, const std::string& schema) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(path, std::string("malformed JSON (") + e.what() + ")");
  }
  if (!doc.contains("schema") || doc["schema"] != schema) {
    fail(path, "expected schema \"" + schema + "\"");
  }
  return doc;
}

void store_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << doc.dump(2) << '\n';
  if (!out) fail(path, "write failed");
}

// Little-endian binary primitives.
static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void put_raw(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_raw(std::istream& in, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    fail(path, "truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void expect_magic(std::istream& in, const std::string& path, const char magic[4]) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    fail(path, std::string("bad magic, expected ") + std::string(magic, 4));
  }
}

json point_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected a 3-vector");
  return Point3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

void write_calibration(const std::string& path,
                       const std::vector<CalibrationEntry>& entries) {
  json cameras = json::array();
  for (const CalibrationEntry& entry : entries) {
    const Camera& cam = entry.camera;
    json k = json::array();
    json r = json::array();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        k.push_back(cam.intrinsics(row, col));
        r.push_back(cam.rotation(row, col));
      }
    }
    cameras.push_back({{"id", cam.id},
                       {"kind", entry.kind},
                       {"K", k},
                       {"R", r},
                       {"t", point_to_json(cam.translation)},
                       {"dist", cam.distortion},
                       {"width", cam.width},
                       {"height", cam.height}});
  }
  store_json(path, json{{"schema", "mvskel/calibration/1"}, {"cameras", cameras}});
}

std::vector<CalibrationEntry> read_calibration(const std::string& path) {
  const json doc = load_json(path, "mvskel/calibration/1");
  if (!doc.contains("cameras") || !doc["cameras"].is_array()) {
    fail(path, "missing cameras array");
  }
  std::vector<CalibrationEntry> entries;
  for (const json& c : doc["cameras"]) {
    try {
      CalibrationEntry entry;
      Camera& cam = entry.camera;
      cam.id = c.at("id").get<int>();
      entry.kind = c.value("kind", "score");
      const auto& k = c.at("K");
      const auto& r = c.at("R");
      if (k.size() != 9 || r.size() != 9) fail(path, "K and R must have 9 entries");
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
          cam.intrinsics(row, col) = k[row * 3 + col].get<double>();
          cam.rotation(row, col) = r[row * 3 + col].get<double>();
        }
      }
      cam.translation = point_from_json(c.at("t"), path);
      const auto& dist = c.at("dist");
      if (dist.size() != 5) fail(path, "dist must have 5 entries");
      for (int i = 0; i < 5; ++i) cam.distortion[i] = dist[i].get<double>();
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      cam.validate();
      entries.push_back(std::move(entry));
    } catch (const json::exception& e) {
      fail(path, std::string("bad camera entry (") + e.what() + ")");
    } catch (const std::invalid_argument& e) {
      fail(path, std::string("invalid camera: ") + e.what());
    }
  }
  return entries;
}

void write_score_maps(const std::string& path, const ScoreMapSet& maps, int frame) {
  json views = json::array();
  for (const auto& [view_id, view] : maps.views()) {
    json detections = json::array();
    for (int i = 0; i < view.detection_count(); ++i) {
      json joints = json::array();
      for (int j = 0; j < kJointCount; ++j) {
        const auto& blob = view.detections()[i].joints[j];
        if (!blob) continue;
        joints.push_back({{"joint", j},
                          {"mu", json::array({blob->peak.x(), blob->peak.y()})},
                          {"a", blob->amplitude},
                          {"sigma", blob->sigma_px}});
      }
      detections.push_back({{"index", i}, {"joints", joints}});
    }
    views.push_back({{"view", view_id}, {"detections", detections}});
  }
  store_json(path, json{{"schema", "mvskel/scoremaps/1"},
                        {"frame", frame},
                        {"views", views}});
}

ScoreMapSet read_score_maps(const std::string& path, int* frame) {
  const json doc = load_json(path, "mvskel/scoremaps/1");
  if (frame) *frame = doc.value("frame", 0);
  ScoreMapSet maps;
  try {
    for (const json& view : doc.at("views")) {
      const int view_id = view.at("view").get<int>();
      for (const json& det : view.at("detections")) {
        const int index = det.at("index").get<int>();
        for (const json& joint : det.at("joints")) {
          DetectionBlob blob;
          blob.view = view_id;
          blob.detection = index;
          blob.joint = joint_from_index(joint.at("joint").get<int>());
          const auto& mu = joint.at("mu");
          blob.peak = Point2(mu.at(0).get<double>(), mu.at(1).get<double>());
          blob.amplitude = joint.at("a").get<double>();
          blob.sigma_px = joint.at("sigma").get<double>();
          maps.add(blob);
        }
      }
    }
  } catch (const json::exception& e) {
    fail(path, std::string("bad score map entry (") + e.what() + ")");
  } catch (const std::exception& e) {
    fail(path, std::string("invalid score map: ") + e.what());
  }
  return maps;
}

void write_dense_score_maps(const std::string& path,
                            const std::vector<DenseScoreMap>& maps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out.write("MVSD", 4);
  put_raw<std::uint32_t>(out, 1);
  put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(maps.size()));
  for (const DenseScoreMap& map : maps) {
    if (static_cast<std::size_t>(map.width) * map.height != map.data.size()) {
      fail(path, "dense map size mismatch");
    }
    put_raw<std::int32_t>(out, map.view);
    put_raw<std::int32_t>(out, joint_index(map.joint));
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(map.width));
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(map.height));
    for (float v : map.data) put_raw<float>(out, v);
  }
  if (!out) fail(path, "write failed");
}

std::vector<DenseScoreMap> read_dense_score_maps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  expect_magic(in, path, "MVSD");
  const auto version = get_raw<std::uint32_t>(in, path);
  if (version != 1) fail(path, "unsupported version " + std::to_string(version));
  const auto count = get_raw<std::uint32_t>(in, path);
  std::vector<DenseScoreMap> maps;
  maps.reserve(count);
  for (std::uint32_t m = 0; m < count; ++m) {
    DenseScoreMap map;
    map.view = get_raw<std::int32_t>(in, path);
    map.joint = joint_from_index(get_raw<std::int32_t>(in, path));
    map.width = static_cast<int>(get_raw<std::uint32_t>(in, path));
    map.height = static_cast<int>(get_raw<std::uint32_t>(in, path));
    const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
    map.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) map.data[i] = get_raw<float>(in, path);
    maps.push_back(std::move(map));
  }
  return maps;
}

void write_depth_maps(const std::string& path, const std::vector<DepthMap>& maps,
                      int frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out.write("MVDP", 4);
  put_raw<std::uint32_t>(out, 1);
  put_raw<std::int32_t>(out, frame);
  put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(maps.size()));
  for (const DepthMap& map : maps) {
    put_raw<std::int32_t>(out, map.sensor.id);
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(map.width));
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(map.height));
    for (float v : map.depth) put_raw<float>(out, v);
  }
  if (!out) fail(path, "write failed");
}

std::vector<DepthMap> read_depth_maps(const std::string& path,
                                      const std::map<int, Camera>& sensors_by_id,
                                      int* frame) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  expect_magic(in, path, "MVDP");
  const auto version = get_raw<std::uint32_t>(in, path);
  if (version != 1) fail(path, "unsupported version " + std::to_string(version));
  const int f = get_raw<std::int32_t>(in, path);
  if (frame) *frame = f;
  const auto count = get_raw<std::uint32_t>(in, path);
  std::vector<DepthMap> maps;
  maps.reserve(count);
  for (std::uint32_t m = 0; m < count; ++m) {
    DepthMap map;
    map.frame = f;
    const int sensor_id = get_raw<std::int32_t>(in, path);
    const auto it = sensors_by_id.find(sensor_id);
    if (it == sensors_by_id.end()) {
      fail(path, "depth raster references unknown sensor id " +
                     std::to_string(sensor_id));
    }
    map.sensor = it->second;
    map.width = static_cast<int>(get_raw<std::uint32_t>(in, path));
    map.height = static_cast<int>(get_raw<std::uint32_t>(in, path));
    const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
    map.depth.resize(n);
    for (std::size_t i = 0; i < n; ++i) map.depth[i] = get_raw<float>(in, path);
    maps.push_back(std::move(map));
  }
  return maps;
}

void write_patch_stream(const std::string& path,
                        const std::vector<PatchTrajectory>& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out.write("MVTS", 4);
  put_raw<std::uint32_t>(out, 1);
  put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stream.size()));
  for (const PatchTrajectory& patch : stream) {
    put_raw<std::int32_t>(out, patch.id);
    put_raw<std::int32_t>(out, patch.start_frame);
    put_raw<std::uint32_t>(out, static_cast<std::uint32_t>(patch.centers.size()));
    for (std::size_t f = 0; f < patch.centers.size(); ++f) {
      for (int a = 0; a < 3; ++a) put_raw<double>(out, patch.centers[f][a]);
      for (int a = 0; a < 3; ++a) put_raw<double>(out, patch.normals[f][a]);
    }
  }
  if (!out) fail(path, "write failed");
}

std::vector<PatchTrajectory> read_patch_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  expect_magic(in, path, "MVTS");
  const auto version = get_raw<std::uint32_t>(in, path);
  if (version != 1) fail(path, "unsupported version " + std::to_string(version));
  const auto count = get_raw<std::uint32_t>(in, path);
  std::vector<PatchTrajectory> stream;
  stream.reserve(count);
  for (std::uint32_t p = 0; p < count; ++p) {
    PatchTrajectory patch;
    patch.id = get_raw<std::int32_t>(in, path);
    patch.start_frame = get_raw<std::int32_t>(in, path);
    const auto frames = get_raw<std::uint32_t>(in, path);
    patch.centers.resize(frames);
    patch.normals.resize(frames);
    for (std::uint32_t f = 0; f < frames; ++f) {
      for (int a = 0; a < 3; ++a) patch.centers[f][a] = get_raw<double>(in, path);
      for (int a = 0; a < 3; ++a) patch.normals[f][a] = get_raw<double>(in, path);
    }
    stream.push_back(std::move(patch));
  }
  return stream;
}

void write_skeletons(const std::string& path,
                     const std::vector<SkeletonFrame>& frames) {
  json jframes = json::array();
  for (const SkeletonFrame& frame : frames) {
    json skeletons = json::array();
    for (const Skeleton& s : frame.skeletons) {
      json joints = json::array();
      for (int j = 0; j < kJointCount; ++j) {
        const SkeletonJoint& sj = s.joints[j];
        if (sj.missing) {
          joints.push_back({{"joint", j}, {"missing", true}});
          continue;
        }
        joints.push_back(
            {{"joint", j},
             {"missing", false},
             {"position", point_to_json(sj.position)},
             {"voxel_position", point_to_json(sj.voxel_position)},
             {"score", sj.score},
             {"refined", sj.refined},
             {"correspondences", static_cast<int>(sj.correspondences.size())}});
      }
      skeletons.push_back(
          {{"person", s.person}, {"theta", s.theta}, {"joints", joints}});
    }
    jframes.push_back({{"frame", frame.frame}, {"skeletons", skeletons}});
  }
  store_json(path, json{{"schema", "mvskel/skeletons/1"}, {"frames", jframes}});
}

std::vector<SkeletonFrame> read_skeletons(const std::string& path) {
  const json doc = load_json(path, "mvskel/skeletons/1");
  std::vector<SkeletonFrame> frames;
  try {
    for (const json& jframe : doc.at("frames")) {
      SkeletonFrame frame;
      frame.frame = jframe.at("frame").get<int>();
      for (const json& js : jframe.at("skeletons")) {
        Skeleton s;
        s.person = js.at("person").get<int>();
        s.theta = js.at("theta").get<double>();
        for (const json& jj : js.at("joints")) {
          const int j = jj.at("joint").get<int>();
          if (j < 0 || j >= kJointCount) fail(path, "joint index out of range");
          SkeletonJoint& sj = s.joints[j];
          sj.missing = jj.at("missing").get<bool>();
          if (sj.missing) continue;
          sj.position = point_from_json(jj.at("position"), path);
          if (jj.contains("voxel_position")) {
            sj.voxel_position = point_from_json(jj.at("voxel_position"), path);
          } else {
            sj.voxel_position = sj.position;
          }
          sj.score = jj.value("score", 0.0);
          sj.refined = jj.value("refined", false);
          const int n = jj.value("correspondences", 0);
          sj.correspondences.assign(static_cast<std::size_t>(std::max(n, 0)),
                                    {-1, -1});
        }
        frame.skeletons.push_back(std::move(s));
      }
      frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    fail(path, std::string("bad skeleton entry (") + e.what() + ")");
  }
  return frames;
}

void write_stream_labels(const std::string& path,
                         const std::vector<std::tuple<int, int, int>>& labels) {
  json jlabels = json::array();
  for (const auto& [patch, person, bone] : labels) {
    jlabels.push_back({{"patch", patch}, {"person", person}, {"bone", bone}});
  }
  store_json(path, json{{"schema", "mvskel/stream-labels/1"}, {"labels", jlabels}});
}

std::vector<std::tuple<int, int, int>> read_stream_labels(const std::string& path) {
  const json doc = load_json(path, "mvskel/stream-labels/1");
  std::vector<std::tuple<int, int, int>> labels;
  try {
    for (const json& l : doc.at("labels")) {
      labels.emplace_back(l.at("patch").get<int>(), l.at("person").get<int>(),
                          l.at("bone").get<int>());
    }
  } catch (const json::exception& e) {
    fail(path, std::string("bad label entry (") + e.what() + ")");
  }
  return labels;
}

namespace {

json curve_to_json(const PckCurve& curve) {
  return json{{"thresholds_cm", curve.thresholds_cm}, {"pck", curve.values}};
}

}  // namespace

void write_eval_report(const std::string& path, const EvalReport& report) {
  json per_count = json::array();
  for (const auto& [count, curve] : report.per_person_count) {
    per_count.push_back({{"person_count", count}, {"curve", curve_to_json(curve)}});
  }
  json unmatched = json::array();
  for (const auto& [frame, count] : report.unmatched_reference) {
    unmatched.push_back({{"frame", frame}, {"count", count}});
  }
  store_json(path,
             json{{"schema", "mvskel/eval-report/1"},
                  {"curve", curve_to_json(report.curve)},
                  {"node_accuracy", report.accuracy.node_accuracy},
                  {"skeleton_accuracy", report.accuracy.skeleton_accuracy},
                  {"total_joints", report.accuracy.total_joints},
                  {"inlier_joints", report.accuracy.inlier_joints},
                  {"total_skeletons", report.accuracy.total_skeletons},
                  {"clean_skeletons", report.accuracy.clean_skeletons},
                  {"per_person_count", per_count},
                  {"unmatched_reference", unmatched},
                  {"camera_subset", report.camera_subset}});
}

void write_pck_csv(const std::string& path, const PckCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << "threshold_cm,pck\n";
  for (std::size_t i = 0; i < curve.thresholds_cm.size(); ++i) {
    std::ostringstream line;
    line << std::setprecision(17) << curve.thresholds_cm[i] << ','
         << curve.values[i] << '\n';
    out << line.str();
  }
  if (!out) fail(path, "write failed");
}

void write_pck_summary_csv(const std::string& path,
                           const std::vector<double>& thresholds_cm,
                           const std::vector<PckCurve>& curves,
                           const std::vector<int>& camera_counts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  const bool with_cameras = !camera_counts.empty();
  std::ostringstream header;
  if (with_cameras) header << "cameras";
  for (std::size_t i = 0; i < thresholds_cm.size(); ++i) {
    if (with_cameras || i > 0) header << ',';
    header << "pck@" << thresholds_cm[i] << "cm";
  }
  out << header.str() << '\n';
  for (std::size_t c = 0; c < curves.size(); ++c) {
    std::ostringstream line;
    line << std::setprecision(17);
    if (with_cameras) line << camera_counts[c];
    for (std::size_t i = 0; i < curves[c].values.size(); ++i) {
      if (with_cameras || i > 0) line << ',';
      line << curves[c].values[i];
    }
    out << line.str() << '\n';
  }
  if (!out) fail(path, "write failed");
}

std::string render_report_table(const EvalReport& report) {
  std::ostringstream out;
  out << "threshold_cm  pck\n";
  for (std::size_t i = 0; i < report.curve.thresholds_cm.size(); ++i) {
    out << std::setw(12) << std::setprecision(4) << std::fixed
        << report.curve.thresholds_cm[i] << "  " << std::setprecision(4)
        << report.curve.values[i] << '\n';
  }
  out << "node accuracy:     " << std::setprecision(4) << report.accuracy.node_accuracy
      << " (" << report.accuracy.inlier_joints << '/' << report.accuracy.total_joints
      << ")\n";
  out << "skeleton accuracy: " << std::setprecision(4)
      << report.accuracy.skeleton_accuracy << " (" << report.accuracy.clean_skeletons
      << '/' << report.accuracy.total_skeletons << ")\n";
  return out.str();
}

}  // namespace mvskel::io
