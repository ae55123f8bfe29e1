#include "mvskel/score_map.hpp"

#include <stdexcept>
#include <string>

namespace mvskel {

void ViewScoreMap::set_blob(DetectionBlob blob) {
  if (blob.detection < 0) throw std::invalid_argument("negative detection index");
  if (blob.detection >= detection_count()) {
    detections_.resize(blob.detection + 1);
  }
  detections_[blob.detection].joints[joint_index(blob.joint)] = blob;
}

bool ViewScoreMap::score_bounds(Point2& lo, Point2& hi) const {
  bool any = false;
  for (const Detection& det : detections_) {
    for (const auto& b : det.joints) {
      if (!b) continue;
      const double r = DetectionBlob::kCutoffSigmas * b->sigma_px;
      const Point2 bl = b->peak.array() - r;
      const Point2 bh = b->peak.array() + r;
      if (!any) {
        lo = bl;
        hi = bh;
        any = true;
      } else {
        lo = lo.cwiseMin(bl);
        hi = hi.cwiseMax(bh);
      }
    }
  }
  return any;
}

void ScoreMapSet::add(const DetectionBlob& blob) {
  if (blob.amplitude < 0.0 || blob.amplitude > 1.0) {
    throw std::invalid_argument("blob amplitude must lie in [0, 1], got " +
                                std::to_string(blob.amplitude));
  }
  if (blob.sigma_px <= 0.0) {
    throw std::invalid_argument("blob sigma must be positive");
  }
  views_[blob.view].set_blob(blob);
}

const ViewScoreMap* ScoreMapSet::view(int view_id) const {
  const auto it = views_.find(view_id);
  return it == views_.end() ? nullptr : &it->second;
}

std::vector<int> ScoreMapSet::view_ids() const {
  std::vector<int> ids;
  ids.reserve(views_.size());
  for (const auto& [id, _] : views_) ids.push_back(id);
  return ids;
}

double ScoreMapSet::merged_score(int view_id, JointId j, const Point2& z) const {
  const ViewScoreMap* v = view(view_id);
  return v ? v->merged_score(j, z) : 0.0;
}

double ScoreMapSet::detection_score(int view_id, int detection, JointId j,
                                    const Point2& z) const {
  const ViewScoreMap* v = view(view_id);
  if (!v || detection < 0 || detection >= v->detection_count()) return 0.0;
  return v->detection_score(detection, j, z);
}

std::optional<Point2> ScoreMapSet::peak(int view_id, int detection, JointId j) const {
  const ViewScoreMap* v = view(view_id);
  if (!v || detection < 0 || detection >= v->detection_count()) return std::nullopt;
  const auto& b = v->blob(detection, j);
  if (!b) return std::nullopt;
  return b->peak;
}

int ScoreMapSet::detection_count(int view_id) const {
  const ViewScoreMap* v = view(view_id);
  return v ? v->detection_count() : 0;
}

}  // namespace mvskel
