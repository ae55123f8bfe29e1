#include "mvskel/eval.hpp"

#include "mvskel/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mvskel {

namespace {

constexpr double kUnmatchable = 1e9;

std::optional<Point3> head_of(const Skeleton& s) {
  const SkeletonJoint& head = s.joint(JointId::HeadTop);
  if (head.missing) return std::nullopt;
  return head.position;
}

/// Per-frame identity matching: Hungarian on head distance.
/// Returns per reference skeleton the matched estimate index or -1.
std::vector<int> match_frame(const std::vector<Skeleton>& estimate,
                             const std::vector<Skeleton>& reference) {
  if (reference.empty() || estimate.empty()) {
    return std::vector<int>(reference.size(), -1);
  }
  std::vector<std::vector<double>> cost(reference.size(),
                                        std::vector<double>(estimate.size()));
  for (std::size_t r = 0; r < reference.size(); ++r) {
    const auto rh = head_of(reference[r]);
    for (std::size_t e = 0; e < estimate.size(); ++e) {
      const auto eh = head_of(estimate[e]);
      cost[r][e] = (rh && eh) ? (*rh - *eh).norm() : kUnmatchable;
    }
  }
  auto match = hungarian_assignment(cost);
  for (std::size_t r = 0; r < reference.size(); ++r) {
    if (match[r] >= 0 && cost[r][match[r]] >= kUnmatchable) match[r] = -1;
  }
  return match;
}

struct JointTally {
  std::vector<double> distances_cm;  ///< infinity for missing joints
};

/// Per-joint 3D distances (cm) between matched skeletons across all frames,
/// with infinity for every unmatched or missing joint.
JointTally tally(const std::vector<SkeletonFrame>& estimate,
                 const std::vector<SkeletonFrame>& reference,
                 std::vector<std::pair<int, int>>* unmatched_per_frame,
                 const std::vector<int>* frame_filter_person_count) {
  std::map<int, const std::vector<Skeleton>*> est_by_frame;
  for (const SkeletonFrame& f : estimate) est_by_frame[f.frame] = &f.skeletons;

  JointTally out;
  for (const SkeletonFrame& ref : reference) {
    if (frame_filter_person_count &&
        std::find(frame_filter_person_count->begin(),
                  frame_filter_person_count->end(),
                  static_cast<int>(ref.skeletons.size())) ==
            frame_filter_person_count->end()) {
      continue;
    }
    static const std::vector<Skeleton> kEmpty;
    const auto it = est_by_frame.find(ref.frame);
    const std::vector<Skeleton>& est = it == est_by_frame.end() ? kEmpty : *it->second;
    const auto match = match_frame(est, ref.skeletons);

    int unmatched = 0;
    for (std::size_t r = 0; r < ref.skeletons.size(); ++r) {
      const Skeleton& rs = ref.skeletons[r];
      const Skeleton* es = match[r] >= 0 ? &est[match[r]] : nullptr;
      if (!es) ++unmatched;
      for (int j = 0; j < kJointCount; ++j) {
        const SkeletonJoint& rj = rs.joints[j];
        if (rj.missing) continue;  // reference joints absent carry no truth
        double d = std::numeric_limits<double>::infinity();
        if (es && !es->joints[j].missing) {
          d = (es->joints[j].position - rj.position).norm() * 100.0;
        }
        out.distances_cm.push_back(d);
      }
    }
    if (unmatched_per_frame && unmatched > 0) {
      unmatched_per_frame->emplace_back(ref.frame, unmatched);
    }
  }
  return out;
}

PckCurve curve_from_tally(const JointTally& tally,
                          const std::vector<double>& thresholds_cm) {
  PckCurve curve;
  curve.thresholds_cm = thresholds_cm;
  curve.values.reserve(thresholds_cm.size());
  const double total = static_cast<double>(tally.distances_cm.size());
  for (double t : thresholds_cm) {
    long correct = 0;
    for (double d : tally.distances_cm) {
      if (d <= t) ++correct;
    }
    curve.values.push_back(total > 0 ? correct / total : 0.0);
  }
  return curve;
}

}  // namespace

PckCurve pck(const std::vector<SkeletonFrame>& estimate,
             const std::vector<SkeletonFrame>& reference,
             const std::vector<double>& thresholds_cm) {
  bool any_reference = false;
  for (const SkeletonFrame& f : reference) {
    any_reference = any_reference || !f.skeletons.empty();
  }
  if (!any_reference) throw std::invalid_argument("pck: empty reference");
  return curve_from_tally(tally(estimate, reference, nullptr, nullptr),
                          thresholds_cm);
}

AccuracyStats skeleton_accuracy(const std::vector<SkeletonFrame>& estimate,
                                const std::vector<SkeletonFrame>& reference,
                                double outlier_threshold_cm) {
  AccuracyStats stats;
  std::map<int, const std::vector<Skeleton>*> est_by_frame;
  for (const SkeletonFrame& f : estimate) est_by_frame[f.frame] = &f.skeletons;

  for (const SkeletonFrame& ref : reference) {
    static const std::vector<Skeleton> kEmpty;
    const auto it = est_by_frame.find(ref.frame);
    const std::vector<Skeleton>& est = it == est_by_frame.end() ? kEmpty : *it->second;
    const auto match = match_frame(est, ref.skeletons);
    for (std::size_t r = 0; r < ref.skeletons.size(); ++r) {
      const Skeleton& rs = ref.skeletons[r];
      const Skeleton* es = match[r] >= 0 ? &est[match[r]] : nullptr;
      ++stats.total_skeletons;
      bool clean = true;
      for (int j = 0; j < kJointCount; ++j) {
        if (rs.joints[j].missing) continue;
        ++stats.total_joints;
        bool inlier = false;
        if (es && !es->joints[j].missing) {
          const double d = (es->joints[j].position - rs.joints[j].position).norm();
          inlier = d * 100.0 <= outlier_threshold_cm;
        }
        if (inlier) {
          ++stats.inlier_joints;
        } else {
          clean = false;
        }
      }
      if (clean) ++stats.clean_skeletons;
    }
  }
  stats.node_accuracy = stats.total_joints > 0
                            ? static_cast<double>(stats.inlier_joints) / stats.total_joints
                            : 0.0;
  stats.skeleton_accuracy =
      stats.total_skeletons > 0
          ? static_cast<double>(stats.clean_skeletons) / stats.total_skeletons
          : 0.0;
  return stats;
}

EvalReport evaluate(const std::vector<SkeletonFrame>& estimate,
                    const std::vector<SkeletonFrame>& reference,
                    const std::vector<double>& thresholds_cm,
                    double outlier_threshold_cm) {
  EvalReport report;
  report.curve = curve_from_tally(
      tally(estimate, reference, &report.unmatched_reference, nullptr),
      thresholds_cm);
  report.accuracy = skeleton_accuracy(estimate, reference, outlier_threshold_cm);

  std::vector<int> person_counts;
  for (const SkeletonFrame& f : reference) {
    const int n = static_cast<int>(f.skeletons.size());
    if (n > 0 && std::find(person_counts.begin(), person_counts.end(), n) ==
                     person_counts.end()) {
      person_counts.push_back(n);
    }
  }
  std::sort(person_counts.begin(), person_counts.end());
  for (int n : person_counts) {
    const std::vector<int> filter{n};
    report.per_person_count.emplace_back(
        n, curve_from_tally(tally(estimate, reference, nullptr, &filter),
                            thresholds_cm));
  }
  return report;
}

std::vector<Camera> sample_cameras(const std::vector<Camera>& cameras, int k,
                                   std::optional<int> seed_camera_id) {
  const int n = static_cast<int>(cameras.size());
  if (k < 1 || k > n) {
    throw std::out_of_range("sample_cameras: k out of range [1, " +
                            std::to_string(n) + "]");
  }

  int seed_index = 0;
  if (seed_camera_id) {
    seed_index = -1;
    for (int i = 0; i < n; ++i) {
      if (cameras[i].id == *seed_camera_id) {
        seed_index = i;
        break;
      }
    }
    if (seed_index < 0) {
      throw std::out_of_range("sample_cameras: unknown seed camera id");
    }
  } else {
    for (int i = 1; i < n; ++i) {
      if (cameras[i].id < cameras[seed_index].id) seed_index = i;
    }
  }

  std::vector<Point3> centers;
  centers.reserve(n);
  for (const Camera& cam : cameras) centers.push_back(cam.center());

  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  std::vector<Camera> subset;
  subset.reserve(k);
  int next = seed_index;
  for (int round = 0; round < k; ++round) {
    taken[next] = 1;
    subset.push_back(cameras[next]);
    for (int i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (centers[i] - centers[next]).norm());
    }
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      // Ties break toward the lower camera id for determinism.
      if (best < 0 || dist[i] > dist[best] ||
          (dist[i] == dist[best] && cameras[i].id < cameras[best].id)) {
        best = i;
      }
    }
    next = best;
  }
  return subset;
}

}  // namespace mvskel
