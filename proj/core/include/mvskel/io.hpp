#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/eval.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/score_map.hpp"
#include "mvskel/skeleton_assembly.hpp"
#include "mvskel/trajectory_refine.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace mvskel::io {

/// All readers throw std::runtime_error naming the offending file on missing,
/// truncated or schema-mismatched input. All writers produce byte-identical
/// output for identical data. Binary payloads are little-endian.

// --- calibration document (JSON) --------------------------------------------
// {"schema":"mvskel/calibration/1","cameras":[{"id","kind","K"(9,row-major),
//  "R"(9,row-major),"t"(3),"dist"(5),"width","height"}]}

struct CalibrationEntry {
  Camera camera;
  std::string kind = "score";  ///< "score" (detection view) or "depth"
};

void write_calibration(const std::string& path,
                       const std::vector<CalibrationEntry>& entries);
std::vector<CalibrationEntry> read_calibration(const std::string& path);

// --- score-map document (JSON, one file per frame) ---------------------------

void write_score_maps(const std::string& path, const ScoreMapSet& maps, int frame);
ScoreMapSet read_score_maps(const std::string& path, int* frame = nullptr);

// --- dense raster alternative (binary, float32) -------------------------------

struct DenseScoreMap {
  int view = 0;
  JointId joint = JointId::Neck;
  int width = 0;
  int height = 0;
  std::vector<float> data;  ///< row-major

  float at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
};

void write_dense_score_maps(const std::string& path,
                            const std::vector<DenseScoreMap>& maps);
std::vector<DenseScoreMap> read_dense_score_maps(const std::string& path);

// --- depth rasters (binary, float32, one file per frame) ---------------------

void write_depth_maps(const std::string& path, const std::vector<DepthMap>& maps,
                      int frame);
/// Sensor calibration is attached from `sensors_by_id`.
std::vector<DepthMap> read_depth_maps(const std::string& path,
                                      const std::map<int, Camera>& sensors_by_id,
                                      int* frame = nullptr);

// --- patch trajectory stream (binary, float64) --------------------------------

void write_patch_stream(const std::string& path,
                        const std::vector<PatchTrajectory>& stream);
std::vector<PatchTrajectory> read_patch_stream(const std::string& path);

// --- skeleton document (JSON) -------------------------------------------------

void write_skeletons(const std::string& path,
                     const std::vector<SkeletonFrame>& frames);
std::vector<SkeletonFrame> read_skeletons(const std::string& path);

// --- stream labels (JSON): patch id -> (person, bone) -------------------------

void write_stream_labels(const std::string& path,
                         const std::vector<std::tuple<int, int, int>>& labels);
std::vector<std::tuple<int, int, int>> read_stream_labels(const std::string& path);

// --- evaluation outputs --------------------------------------------------------

void write_eval_report(const std::string& path, const EvalReport& report);
/// Two-column CSV: threshold_cm,pck.
void write_pck_csv(const std::string& path, const PckCurve& curve);
/// One pck@threshold column per threshold; one row per curve. When camera
/// counts are given (sweep mode) a leading `cameras` column is added.
void write_pck_summary_csv(const std::string& path,
                           const std::vector<double>& thresholds_cm,
                           const std::vector<PckCurve>& curves,
                           const std::vector<int>& camera_counts = {});

std::string render_report_table(const EvalReport& report);

}  // namespace mvskel::io
