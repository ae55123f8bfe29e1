#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/part_graph.hpp"
#include "mvskel/score_fusion.hpp"
#include "mvskel/score_map.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace mvskel {

/// Sentinel proposal index for a joint left unassigned.
inline constexpr int kMissing = -1;

/// One scored (ku, kv) combination available to the DP.
struct DpPart {
  int ku = 0;
  int kv = 0;
  double score = 0.0;
};

/// A tree max-sum instance. Joints are 0..joint_count-1; bones are
/// (parent, child) pairs listed parent-first from the root. Candidates for a
/// joint are its proposal indices 0..proposal_counts[j]-1 plus MISSING.
struct DpProblem {
  int joint_count = 0;
  int root = 0;
  std::vector<std::pair<int, int>> bones;
  std::vector<int> proposal_counts;
  std::vector<std::vector<DpPart>> parts;  // aligned with bones
};

struct DpResult {
  std::vector<int> assignment;  ///< per joint: proposal index or kMissing
  double theta = 0.0;           ///< sum of part scores over assigned bones
};

/// Max-sum message passing from the leaves to the root. A bone contributes
/// its part score when both endpoints are assigned and that (ku, kv) pair is
/// in the pool; pairs absent from the pool are infeasible; a bone with a
/// MISSING endpoint contributes 0. Ties are broken by the lowest proposal
/// index in root-to-leaf order, with MISSING ranked after every proposal.
/// Returns nullopt when every joint's candidate pool is empty.
std::optional<DpResult> dp_best_skeleton(const DpProblem& problem);

struct SkeletonJoint {
  int proposal = kMissing;  ///< node proposal index; kMissing when none
  /// True until the joint is assigned (Stage 1) or filled in (Stage 2).
  bool missing = true;
  Point3 position = Point3::Zero();        ///< refined position
  Point3 voxel_position = Point3::Zero();  ///< proposal position (pre-refinement)
  double score = 0.0;                      ///< node proposal score
  bool refined = false;
  /// (view id, detection index) pairs claimed by this joint.
  std::vector<std::pair<int, int>> correspondences;
};

struct Skeleton {
  std::array<SkeletonJoint, kJointCount> joints;
  double theta = 0.0;
  int person = -1;

  const SkeletonJoint& joint(JointId j) const { return joints[joint_index(j)]; }
  SkeletonJoint& joint(JointId j) { return joints[joint_index(j)]; }
};

struct RefineOptions {
  int max_iterations = 50;
  double step_tolerance_m = 1e-6;
};

struct AssemblyOptions {
  double tau = 0.05;
  /// Max reprojection distance for claiming a 2D detection joint.
  double correspondence_radius_px = 10.0;
  /// Skeletons whose head claims fewer correspondences are discarded.
  int min_head_correspondences = 2;
  /// Greedy extraction stops once DP yields theta below this multiple of tau.
  double min_theta_factor = 14.0;
  int max_consecutive_head_failures = 2;
  RefineOptions refine;
};

/// Greedy multi-person extraction for one frame: repeatedly run the DP,
/// claim 2D correspondences (nearest available detection joint within the
/// correspondence radius, one owner per detection joint), apply the head
/// filter, refine claimed nodes by reprojection, and remove assigned
/// proposals from the pool. Output is ordered by decreasing theta.
std::vector<Skeleton> extract_skeletons(const JointProposals& proposals,
                                        const PartPools& parts,
                                        const ScoreMapSet& maps,
                                        const std::vector<Camera>& cameras,
                                        const SkeletonTopology& topology,
                                        const AssemblyOptions& options = {});

struct RefineObservation {
  const Camera* camera = nullptr;
  Point2 pixel = Point2::Zero();
};

/// Minimizes the sum of unsquared reprojection distances
///   sum_c | P_c(Z) - s_c |_2
/// by iteratively reweighted least squares seeded at `initial`. The result
/// never has a larger objective than the seed. Requires >= 2 observations.
Point3 refine_node(const std::vector<RefineObservation>& observations,
                   const Point3& initial, const RefineOptions& options = {});

struct SkeletonTrajectory {
  int person = -1;
  std::map<int, Skeleton> frames;  ///< frame index -> skeleton
};

/// Greedy temporal identity association on head-node distance. An active
/// trajectory claims the unclaimed skeleton whose head is nearest to its last
/// head position if within threshold_m_per_gap_frame * gap; trajectories
/// survive up to max_frame_gap missed frames. Person ids are assigned in
/// creation order and written into the returned skeletons.
std::vector<SkeletonTrajectory> associate_time(
    const std::vector<std::vector<Skeleton>>& frames, int max_frame_gap = 2,
    double threshold_m_per_gap_frame = 0.30);

}  // namespace mvskel
