#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/geometry.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace mvskel {

/// One 2D joint detection, stored as an isotropic Gaussian confidence blob
///   h(z) = a * exp(-|z - peak|^2 / (2 sigma^2)).
/// The evaluation is defined to be exactly zero beyond kCutoffSigmas * sigma
/// from the peak; the true Gaussian tail there is below 1e-86, and the hard
/// zero makes volume fusion O(detections near the pixel).
struct DetectionBlob {
  static constexpr double kCutoffSigmas = 20.0;

  int view = 0;
  int detection = 0;
  JointId joint = JointId::Neck;
  Point2 peak = Point2::Zero();
  double amplitude = 1.0;
  double sigma_px = 3.0;

  double evaluate(const Point2& z) const {
    const double dx = z.x() - peak.x();
    const double dy = z.y() - peak.y();
    const double d2 = dx * dx + dy * dy;
    const double cutoff = kCutoffSigmas * sigma_px;
    if (d2 > cutoff * cutoff) return 0.0;
    return amplitude * std::exp(-d2 / (2.0 * sigma_px * sigma_px));
  }
};

/// All joint blobs of one 2D person detection in one view.
struct Detection {
  std::array<std::optional<DetectionBlob>, kJointCount> joints;
};

/// Score maps of a single camera view: a list of person detections, each
/// carrying up to 15 joint blobs.
class ViewScoreMap {
 public:
  int detection_count() const { return static_cast<int>(detections_.size()); }
  const std::vector<Detection>& detections() const { return detections_; }

  const std::optional<DetectionBlob>& blob(int detection, JointId j) const {
    return detections_[detection].joints[joint_index(j)];
  }

  /// Per-detection score h_ij(z); zero when the detection lacks the joint.
  double detection_score(int detection, JointId j, const Point2& z) const {
    const auto& b = detections_[detection].joints[joint_index(j)];
    return b ? b->evaluate(z) : 0.0;
  }

  /// Merged map h_j(z) = max over detections of h_ij(z); zero when empty.
  double merged_score(JointId j, const Point2& z) const {
    double best = 0.0;
    for (const Detection& det : detections_) {
      const auto& b = det.joints[joint_index(j)];
      if (!b) continue;
      const double s = b->evaluate(z);
      if (s > best) best = s;
    }
    return best;
  }

  void set_blob(DetectionBlob blob);

  /// Bounding rectangle of all blob cutoff disks; pixels outside evaluate to
  /// exactly zero for every joint. False when the view has no blobs.
  bool score_bounds(Point2& lo, Point2& hi) const;

 private:
  std::vector<Detection> detections_;
};

/// Per-view score maps for one frame, indexed by camera id.
class ScoreMapSet {
 public:
  /// Inserts a blob, growing view and detection slots as needed. Throws
  /// std::invalid_argument when the blob violates amplitude/sigma bounds.
  void add(const DetectionBlob& blob);

  const ViewScoreMap* view(int view_id) const;
  ViewScoreMap& view_mut(int view_id) { return views_[view_id]; }
  std::vector<int> view_ids() const;
  bool empty() const { return views_.empty(); }

  /// h_j^c(z): merged score of joint j in view c; zero for absent views.
  double merged_score(int view_id, JointId j, const Point2& z) const;

  /// h_ij^c(z): per-detection score; zero for absent views/detections.
  double detection_score(int view_id, int detection, JointId j, const Point2& z) const;

  /// Peak pixel s_ij^c of a detection's joint blob, when present.
  std::optional<Point2> peak(int view_id, int detection, JointId j) const;

  int detection_count(int view_id) const;

  const std::map<int, ViewScoreMap>& views() const { return views_; }

 private:
  std::map<int, ViewScoreMap> views_;
};

}  // namespace mvskel
