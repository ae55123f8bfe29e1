#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/score_fusion.hpp"
#include "mvskel/score_map.hpp"

#include <optional>
#include <vector>

namespace mvskel {

/// A putative body part: a pair of node proposals for the two joints of a
/// bone, scored by cross-view 2D connectivity voting.
struct PartProposal {
  int bone = 0;  ///< index into SkeletonTopology::bones()
  int ku = 0;    ///< proposal index for the parent joint
  int kv = 0;    ///< proposal index for the child joint
  Point3 endpoint_u = Point3::Zero();
  Point3 endpoint_v = Point3::Zero();
  double score = 0.0;    ///< Phi, in [0, 1]
  bool visible = true;   ///< false when no camera saw both endpoints
};

using PartPools = std::vector<std::vector<PartProposal>>;  // per bone

/// Connectivity score of a putative part:
///   Phi = (1/|V|) * sum_{c in V} max_i w_iuv^c * delta_iuv^c,
/// where w is the mean of the two per-detection endpoint scores and delta
/// gates on both endpoints exceeding tau for the same detection i. V is the
/// set of cameras where both endpoints pass is_visible, traversed in
/// ascending camera id order. Returns nullopt when V is empty (callers treat
/// that as Phi = 0).
std::optional<double> part_score(const ScoreMapSet& maps,
                                 const std::vector<Camera>& cameras,
                                 const NodeProposal& nu, const NodeProposal& nv,
                                 double tau);

struct PartEnumerationOptions {
  double tau = 0.05;
  /// Length prior guarding against degenerate cross-person parts; not part of
  /// the voting model and can be switched off.
  bool prune_by_length = true;
  double max_length_m = 1.0;
  double torso_max_length_m = 1.5;
};

/// Builds the full part pool: for every bone (u,v), every surviving
/// combination of a u-proposal and a v-proposal with its computed Phi.
/// Combinations whose Phi is 0 (gate failed everywhere, or no visibility)
/// are retained but flagged via score == 0 / visible == false.
PartPools enumerate_parts(const JointProposals& proposals,
                          const SkeletonTopology& topology,
                          const ScoreMapSet& maps,
                          const std::vector<Camera>& cameras,
                          const PartEnumerationOptions& options = {});

}  // namespace mvskel
