#include "mvskel/part_graph.hpp"

#include <algorithm>

namespace mvskel {

std::optional<double> part_score(const ScoreMapSet& maps,
                                 const std::vector<Camera>& cameras,
                                 const NodeProposal& nu, const NodeProposal& nv,
                                 double tau) {
  std::vector<const Camera*> ordered;
  ordered.reserve(cameras.size());
  for (const Camera& cam : cameras) ordered.push_back(&cam);
  std::sort(ordered.begin(), ordered.end(),
            [](const Camera* a, const Camera* b) { return a->id < b->id; });

  double sum = 0.0;
  int visible_count = 0;
  for (const Camera* cam : ordered) {
    if (!is_visible(*cam, nu.position) || !is_visible(*cam, nv.position)) continue;
    ++visible_count;
    const Point2 zu = project(*cam, nu.position);
    const Point2 zv = project(*cam, nv.position);
    const ViewScoreMap* view = maps.view(cam->id);
    if (!view) continue;
    double best = 0.0;
    for (int i = 0; i < view->detection_count(); ++i) {
      const double hu = view->detection_score(i, nu.joint, zu);
      const double hv = view->detection_score(i, nv.joint, zv);
      if (hu > tau && hv > tau) {
        const double w = 0.5 * (hu + hv);
        if (w > best) best = w;
      }
    }
    sum += best;
  }
  if (visible_count == 0) return std::nullopt;
  return sum / visible_count;
}

PartPools enumerate_parts(const JointProposals& proposals,
                          const SkeletonTopology& topology,
                          const ScoreMapSet& maps,
                          const std::vector<Camera>& cameras,
                          const PartEnumerationOptions& options) {
  PartPools pools(topology.bone_count());
  for (int b = 0; b < topology.bone_count(); ++b) {
    const Bone& bone = topology.bones()[b];
    const auto& us = proposals[joint_index(bone.parent)];
    const auto& vs = proposals[joint_index(bone.child)];
    const double max_len = (b == topology.torso_bone())
                               ? options.torso_max_length_m
                               : options.max_length_m;
    auto& pool = pools[b];
    pool.reserve(us.size() * vs.size());
    for (const NodeProposal& nu : us) {
      for (const NodeProposal& nv : vs) {
        if (options.prune_by_length &&
            (nu.position - nv.position).norm() > max_len) {
          continue;
        }
        PartProposal part;
        part.bone = b;
        part.ku = nu.index;
        part.kv = nv.index;
        part.endpoint_u = nu.position;
        part.endpoint_v = nv.position;
        const auto phi = part_score(maps, cameras, nu, nv, options.tau);
        part.visible = phi.has_value();
        part.score = phi.value_or(0.0);
        pool.push_back(part);
      }
    }
  }
  return pools;
}

}  // namespace mvskel
