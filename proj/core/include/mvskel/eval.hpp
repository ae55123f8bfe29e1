#pragma once

#include "mvskel/geometry.hpp"
#include "mvskel/skeleton_assembly.hpp"

#include <map>
#include <optional>
#include <vector>

namespace mvskel {

/// One frame of a skeleton document.
struct SkeletonFrame {
  int frame = 0;
  std::vector<Skeleton> skeletons;
};

struct PckCurve {
  std::vector<double> thresholds_cm;
  std::vector<double> values;  ///< aligned with thresholds_cm, in [0, 1]
};

struct AccuracyStats {
  double node_accuracy = 0.0;
  double skeleton_accuracy = 0.0;
  long total_joints = 0;
  long inlier_joints = 0;
  long total_skeletons = 0;
  long clean_skeletons = 0;  ///< skeletons with zero outlier joints
};

struct EvalReport {
  PckCurve curve;
  AccuracyStats accuracy;
  /// PCK curves bucketed by the reference person count of the frame.
  std::vector<std::pair<int, PckCurve>> per_person_count;
  /// Frames where some reference skeletons found no estimate to match.
  std::vector<std::pair<int, int>> unmatched_reference;  ///< (frame, count)
  std::vector<int> camera_subset;                        ///< ids, when swept
};

/// 3D PCK in centimeters. Estimated and reference skeletons are matched per
/// frame by Hungarian assignment on head distance; missing estimated joints
/// and unmatched reference skeletons count as incorrect at every threshold.
/// Throws std::invalid_argument when the reference is empty.
PckCurve pck(const std::vector<SkeletonFrame>& estimate,
             const std::vector<SkeletonFrame>& reference,
             const std::vector<double>& thresholds_cm);

/// Node / whole-skeleton accuracy at a fixed outlier threshold.
AccuracyStats skeleton_accuracy(const std::vector<SkeletonFrame>& estimate,
                                const std::vector<SkeletonFrame>& reference,
                                double outlier_threshold_cm = 5.0);

/// Full report: overall PCK, accuracy stats, per-person-count breakdown.
EvalReport evaluate(const std::vector<SkeletonFrame>& estimate,
                    const std::vector<SkeletonFrame>& reference,
                    const std::vector<double>& thresholds_cm,
                    double outlier_threshold_cm = 5.0);

/// Greedy furthest-point camera subsampling on camera-center distance,
/// seeded at `seed_camera_id` (default: the lowest id). The result for k is
/// always a prefix of the result for k+1. Throws std::out_of_range for k
/// outside [1, |cameras|].
std::vector<Camera> sample_cameras(const std::vector<Camera>& cameras, int k,
                                   std::optional<int> seed_camera_id = std::nullopt);

}  // namespace mvskel
