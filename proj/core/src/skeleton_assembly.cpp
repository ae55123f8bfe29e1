#include "mvskel/skeleton_assembly.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvskel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Candidate ranks for joint j run 0..n-1 (proposal indices) and n = MISSING.
int candidate_count(const DpProblem& p, int joint) {
  return p.proposal_counts[joint] + 1;
}

bool is_missing_rank(const DpProblem& p, int joint, int rank) {
  return rank == p.proposal_counts[joint];
}

}  // namespace

std::optional<DpResult> dp_best_skeleton(const DpProblem& problem) {
  const int joints = problem.joint_count;
  if (joints <= 0) return std::nullopt;
  bool any_proposals = false;
  for (int n : problem.proposal_counts) any_proposals = any_proposals || n > 0;
  if (!any_proposals) return std::nullopt;

  // Dense per-bone score tables; pairs absent from the pool are infeasible.
  std::vector<std::vector<double>> edge_scores(problem.bones.size());
  for (std::size_t b = 0; b < problem.bones.size(); ++b) {
    const auto [u, v] = problem.bones[b];
    const int nu = problem.proposal_counts[u];
    const int nv = problem.proposal_counts[v];
    edge_scores[b].assign(static_cast<std::size_t>(nu) * nv, kNegInf);
    for (const DpPart& part : problem.parts[b]) {
      if (part.ku < 0 || part.ku >= nu || part.kv < 0 || part.kv >= nv) {
        throw std::invalid_argument("DP part references an unknown proposal");
      }
      edge_scores[b][static_cast<std::size_t>(part.ku) * nv + part.kv] = part.score;
    }
  }

  std::vector<std::vector<int>> child_bones(joints);
  for (std::size_t b = 0; b < problem.bones.size(); ++b) {
    child_bones[problem.bones[b].first].push_back(static_cast<int>(b));
  }

  // value[j][rank]: best score of j's subtree given j takes `rank`.
  // choice[b][parent_rank]: the child rank realizing the bone-b message.
  std::vector<std::vector<double>> value(joints);
  std::vector<std::vector<int>> choice(problem.bones.size());
  for (int j = 0; j < joints; ++j) {
    value[j].assign(candidate_count(problem, j), 0.0);
  }

  // Bones are listed parent-first, so a reverse sweep visits children before
  // their parents.
  for (int b = static_cast<int>(problem.bones.size()) - 1; b >= 0; --b) {
    const auto [u, v] = problem.bones[b];
    const int nu = problem.proposal_counts[u];
    const int nv = problem.proposal_counts[v];
    choice[b].assign(candidate_count(problem, u), 0);
    for (int pu = 0; pu < candidate_count(problem, u); ++pu) {
      double best = kNegInf;
      int best_rank = 0;
      for (int pv = 0; pv < candidate_count(problem, v); ++pv) {
        double edge;
        if (is_missing_rank(problem, u, pu) || is_missing_rank(problem, v, pv)) {
          edge = 0.0;
        } else {
          edge = edge_scores[b][static_cast<std::size_t>(pu) * nv + pv];
        }
        if (edge == kNegInf) continue;
        const double total = edge + value[v][pv];
        if (total > best) {
          best = total;
          best_rank = pv;
        }
      }
      // A MISSING child always yields a finite option, so best is finite.
      choice[b][pu] = best_rank;
      value[u][pu] += best;
    }
    (void)nu;
  }

  const int root = problem.root;
  double best_root = kNegInf;
  int best_root_rank = 0;
  for (int r = 0; r < candidate_count(problem, root); ++r) {
    if (value[root][r] > best_root) {
      best_root = value[root][r];
      best_root_rank = r;
    }
  }

  DpResult result;
  result.theta = best_root;
  result.assignment.assign(joints, kMissing);
  std::vector<int> rank(joints, 0);
  rank[root] = best_root_rank;
  result.assignment[root] =
      is_missing_rank(problem, root, best_root_rank) ? kMissing : best_root_rank;
  for (std::size_t b = 0; b < problem.bones.size(); ++b) {
    const auto [u, v] = problem.bones[b];
    const int rv = choice[b][rank[u]];
    rank[v] = rv;
    result.assignment[v] = is_missing_rank(problem, v, rv) ? kMissing : rv;
  }
  return result;
}

namespace {

/// Tracks which (view, detection, joint) 2D detections are still unclaimed.
class DetectionLedger {
 public:
  explicit DetectionLedger(const ScoreMapSet& maps) {
    for (const auto& [view_id, view] : maps.views()) {
      claimed_[view_id].assign(view.detection_count(), {});
    }
  }

  bool available(int view, int detection, int joint) const {
    const auto it = claimed_.find(view);
    if (it == claimed_.end()) return true;
    return !it->second[detection][joint];
  }

  void claim(int view, int detection, int joint) {
    claimed_.at(view)[detection][joint] = true;
  }

  void release(int view, int detection, int joint) {
    claimed_.at(view)[detection][joint] = false;
  }

 private:
  std::map<int, std::vector<std::array<bool, kJointCount>>> claimed_;
};

struct PendingClaim {
  int joint;
  int view;
  int detection;
};

}  // namespace

Point3 refine_node(const std::vector<RefineObservation>& observations,
                   const Point3& initial, const RefineOptions& options) {
  if (observations.size() < 2) {
    throw std::invalid_argument("refine_node requires at least 2 correspondences");
  }

  const auto objective = [&](const Point3& z, double* out) -> bool {
    double sum = 0.0;
    for (const RefineObservation& obs : observations) {
      const auto pixel = try_project(*obs.camera, z);
      if (!pixel) return false;
      sum += (*pixel - obs.pixel).norm();
    }
    *out = sum;
    return true;
  };

  Point3 z = initial;
  double obj = 0.0;
  if (!objective(z, &obj)) return initial;

  const double jac_step = 1e-7;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Mat3 hessian = Mat3::Zero();
    Point3 gradient = Point3::Zero();
    bool ok = true;
    for (const RefineObservation& obs : observations) {
      const auto pixel = try_project(*obs.camera, z);
      if (!pixel) {
        ok = false;
        break;
      }
      const Point2 residual = *pixel - obs.pixel;
      const double norm = residual.norm();
      const double weight = 1.0 / std::max(norm, 1e-12);

      Eigen::Matrix<double, 2, 3> jac;
      for (int axis = 0; axis < 3; ++axis) {
        Point3 zp = z;
        Point3 zm = z;
        zp[axis] += jac_step;
        zm[axis] -= jac_step;
        const auto pp = try_project(*obs.camera, zp);
        const auto pm = try_project(*obs.camera, zm);
        if (!pp || !pm) {
          ok = false;
          break;
        }
        jac.col(axis) = (*pp - *pm) / (2.0 * jac_step);
      }
      if (!ok) break;
      hessian += weight * jac.transpose() * jac;
      gradient -= weight * jac.transpose() * residual;
    }
    if (!ok) break;

    const Point3 step = hessian.ldlt().solve(gradient);
    if (!step.allFinite()) break;

    // Backtrack until the unsquared objective decreases.
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-6) {
      const Point3 candidate = z + alpha * step;
      double cand_obj = 0.0;
      if (objective(candidate, &cand_obj) && cand_obj < obj) {
        z = candidate;
        obj = cand_obj;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (alpha * step.norm() < options.step_tolerance_m) break;
  }
  return z;
}

std::vector<Skeleton> extract_skeletons(const JointProposals& proposals,
                                        const PartPools& parts,
                                        const ScoreMapSet& maps,
                                        const std::vector<Camera>& cameras,
                                        const SkeletonTopology& topology,
                                        const AssemblyOptions& options) {
  // Cameras in ascending id order for deterministic claiming.
  std::vector<const Camera*> ordered_cameras;
  ordered_cameras.reserve(cameras.size());
  for (const Camera& cam : cameras) ordered_cameras.push_back(&cam);
  std::sort(ordered_cameras.begin(), ordered_cameras.end(),
            [](const Camera* a, const Camera* b) { return a->id < b->id; });
  std::map<int, const Camera*> camera_by_id;
  for (const Camera* cam : ordered_cameras) camera_by_id[cam->id] = cam;

  // Surviving proposal indices per joint, kept ascending.
  std::array<std::vector<int>, kJointCount> alive;
  for (int j = 0; j < kJointCount; ++j) {
    alive[j].resize(proposals[j].size());
    for (std::size_t k = 0; k < proposals[j].size(); ++k) {
      alive[j][k] = static_cast<int>(k);
    }
  }
  PartPools pool = parts;

  DetectionLedger ledger(maps);
  std::vector<Skeleton> results;
  int consecutive_head_failures = 0;

  const int head = joint_index(JointId::HeadTop);

  while (true) {
    if (pool[topology.torso_bone()].empty()) break;

    // Compact the surviving pools into a DP instance.
    DpProblem problem;
    problem.joint_count = kJointCount;
    problem.root = joint_index(topology.root());
    std::array<std::vector<int>, kJointCount> rank_of;  // original -> rank
    for (int j = 0; j < kJointCount; ++j) {
      problem.proposal_counts.push_back(static_cast<int>(alive[j].size()));
      rank_of[j].assign(proposals[j].size(), -1);
      for (std::size_t r = 0; r < alive[j].size(); ++r) {
        rank_of[j][alive[j][r]] = static_cast<int>(r);
      }
    }
    for (int b = 0; b < topology.bone_count(); ++b) {
      const Bone& bone = topology.bones()[b];
      problem.bones.emplace_back(joint_index(bone.parent), joint_index(bone.child));
      std::vector<DpPart> entries;
      entries.reserve(pool[b].size());
      for (const PartProposal& part : pool[b]) {
        DpPart e;
        e.ku = rank_of[joint_index(bone.parent)][part.ku];
        e.kv = rank_of[joint_index(bone.child)][part.kv];
        e.score = part.score;
        entries.push_back(e);
      }
      problem.parts.push_back(std::move(entries));
    }

    const auto dp = dp_best_skeleton(problem);
    if (!dp) break;
    if (dp->theta < options.min_theta_factor * options.tau) break;

    Skeleton skeleton;
    skeleton.theta = dp->theta;
    std::vector<int> assigned_original(kJointCount, kMissing);
    for (int j = 0; j < kJointCount; ++j) {
      if (dp->assignment[j] == kMissing) continue;
      const int original = alive[j][dp->assignment[j]];
      assigned_original[j] = original;
      const NodeProposal& np = proposals[j][original];
      SkeletonJoint& sj = skeleton.joints[j];
      sj.proposal = original;
      sj.missing = false;
      sj.position = np.position;
      sj.voxel_position = np.position;
      sj.score = np.score;
    }

    // Claim 2D correspondences: nearest available detection joint per view,
    // within the correspondence radius.
    std::vector<PendingClaim> claims;
    for (int j = 0; j < kJointCount; ++j) {
      SkeletonJoint& sj = skeleton.joints[j];
      if (sj.missing) continue;
      const JointId jid = static_cast<JointId>(j);
      for (const Camera* cam : ordered_cameras) {
        const auto pixel = try_project(*cam, sj.position);
        if (!pixel) continue;
        const ViewScoreMap* view = maps.view(cam->id);
        if (!view) continue;
        double best_dist = options.correspondence_radius_px;
        int best_det = -1;
        for (int i = 0; i < view->detection_count(); ++i) {
          if (!ledger.available(cam->id, i, j)) continue;
          const auto& blob = view->blob(i, jid);
          if (!blob) continue;
          const double dist = (blob->peak - *pixel).norm();
          if (dist < best_dist) {
            best_dist = dist;
            best_det = i;
          }
        }
        if (best_det >= 0) {
          ledger.claim(cam->id, best_det, j);
          claims.push_back({j, cam->id, best_det});
          sj.correspondences.emplace_back(cam->id, best_det);
        }
      }
    }

    // Remove assigned proposals from the pool whether or not the skeleton
    // survives the head filter; the greedy loop must make progress.
    for (int j = 0; j < kJointCount; ++j) {
      const int original = assigned_original[j];
      if (original == kMissing) continue;
      auto& list = alive[j];
      list.erase(std::remove(list.begin(), list.end(), original), list.end());
    }
    for (int b = 0; b < topology.bone_count(); ++b) {
      const Bone& bone = topology.bones()[b];
      const int u = joint_index(bone.parent);
      const int v = joint_index(bone.child);
      auto& entries = pool[b];
      entries.erase(std::remove_if(entries.begin(), entries.end(),
                                   [&](const PartProposal& p) {
                                     return p.ku == assigned_original[u] ||
                                            p.kv == assigned_original[v];
                                   }),
                    entries.end());
    }

    const int head_count =
        static_cast<int>(skeleton.joints[head].correspondences.size());
    if (skeleton.joints[head].missing ||
        head_count < options.min_head_correspondences) {
      for (const PendingClaim& c : claims) ledger.release(c.view, c.detection, c.joint);
      ++consecutive_head_failures;
      if (consecutive_head_failures >= options.max_consecutive_head_failures) break;
      continue;
    }
    consecutive_head_failures = 0;

    // Reprojection refinement from the claimed correspondences.
    for (int j = 0; j < kJointCount; ++j) {
      SkeletonJoint& sj = skeleton.joints[j];
      if (sj.missing || sj.correspondences.size() < 2) continue;
      std::vector<RefineObservation> observations;
      observations.reserve(sj.correspondences.size());
      for (const auto& [view_id, det] : sj.correspondences) {
        const auto peak = maps.peak(view_id, det, static_cast<JointId>(j));
        const auto cam = camera_by_id.find(view_id);
        if (cam != camera_by_id.end() && peak) {
          observations.push_back({cam->second, *peak});
        }
      }
      if (observations.size() >= 2) {
        sj.position = refine_node(observations, sj.voxel_position, options.refine);
        sj.refined = true;
      }
    }

    results.push_back(std::move(skeleton));
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const Skeleton& a, const Skeleton& b) { return a.theta > b.theta; });
  return results;
}

namespace {

std::optional<Point3> head_position(const Skeleton& skeleton) {
  const SkeletonJoint& head = skeleton.joint(JointId::HeadTop);
  if (!head.missing) return head.position;
  return std::nullopt;
}

struct ActiveTrack {
  int trajectory = 0;
  Point3 last_head = Point3::Zero();
  int last_frame = 0;
};

}  // namespace

std::vector<SkeletonTrajectory> associate_time(
    const std::vector<std::vector<Skeleton>>& frames, int max_frame_gap,
    double threshold_m_per_gap_frame) {
  std::vector<SkeletonTrajectory> trajectories;
  std::vector<ActiveTrack> active;

  for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
    const auto& skeletons = frames[f];
    std::vector<bool> claimed(skeletons.size(), false);

    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](const ActiveTrack& t) {
                                  return f - t.last_frame > max_frame_gap;
                                }),
                 active.end());

    for (ActiveTrack& track : active) {
      const int gap = f - track.last_frame;
      const double threshold = threshold_m_per_gap_frame * gap;
      double best_dist = std::numeric_limits<double>::infinity();
      int best = -1;
      for (int s = 0; s < static_cast<int>(skeletons.size()); ++s) {
        if (claimed[s]) continue;
        const auto head = head_position(skeletons[s]);
        if (!head) continue;
        const double dist = (*head - track.last_head).norm();
        if (dist <= threshold && dist < best_dist) {
          best_dist = dist;
          best = s;
        }
      }
      if (best >= 0) {
        claimed[best] = true;
        Skeleton copy = skeletons[best];
        copy.person = trajectories[track.trajectory].person;
        trajectories[track.trajectory].frames[f] = std::move(copy);
        track.last_head = *head_position(skeletons[best]);
        track.last_frame = f;
      }
    }

    for (int s = 0; s < static_cast<int>(skeletons.size()); ++s) {
      if (claimed[s]) continue;
      const auto head = head_position(skeletons[s]);
      if (!head) continue;
      SkeletonTrajectory trajectory;
      trajectory.person = static_cast<int>(trajectories.size());
      Skeleton copy = skeletons[s];
      copy.person = trajectory.person;
      trajectory.frames[f] = std::move(copy);
      trajectories.push_back(std::move(trajectory));
      active.push_back({static_cast<int>(trajectories.size()) - 1, *head, f});
    }
  }
  return trajectories;
}

}  // namespace mvskel
