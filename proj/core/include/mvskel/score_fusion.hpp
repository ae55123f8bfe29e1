#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/score_map.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace mvskel {

/// Axis-aligned voxel grid. Voxel (0,0,0) is centered at `origin`; voxel
/// (ix,iy,iz) at origin + spacing * (ix,iy,iz). Linear indices run z-fastest.
struct GridSpec {
  Point3 origin = Point3::Zero();
  double spacing = 0.04;
  int nx = 0, ny = 0, nz = 0;

  /// Grid whose voxel centers cover [lo, hi] (inclusive of a voxel whose
  /// center is the snapped lower corner).
  static GridSpec from_bounds(const Point3& lo, const Point3& hi, double spacing);

  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(nx) * ny * nz;
  }

  Point3 center(int ix, int iy, int iz) const {
    return origin + spacing * Point3(ix, iy, iz);
  }

  std::int64_t linear_index(int ix, int iy, int iz) const {
    return (static_cast<std::int64_t>(ix) * ny + iy) * nz + iz;
  }

  std::array<int, 3> coords(std::int64_t index) const {
    const int iz = static_cast<int>(index % nz);
    const std::int64_t rest = index / nz;
    return {static_cast<int>(rest / ny), static_cast<int>(rest % ny), iz};
  }

  bool contains(const Point3& p) const;
};

/// Fused per-joint 3D score fields H_j plus the per-voxel count of cameras
/// that see the voxel center. Voxels no camera sees carry score 0.
class ScoreVolume {
 public:
  explicit ScoreVolume(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  double score(JointId j, std::int64_t voxel) const {
    return scores_[joint_index(j)][voxel];
  }
  int visible_count(std::int64_t voxel) const { return visible_[voxel]; }
  bool invisible(std::int64_t voxel) const { return visible_[voxel] == 0; }

  std::vector<double>& field(JointId j) { return scores_[joint_index(j)]; }
  const std::vector<double>& field(JointId j) const {
    return scores_[joint_index(j)];
  }
  std::vector<std::uint16_t>& visible_counts() { return visible_; }

 private:
  GridSpec grid_;
  std::array<std::vector<double>, kJointCount> scores_;
  std::vector<std::uint16_t> visible_;
};

/// A candidate 3D position for one joint: a thresholded local maximum of the
/// fused score volume.
struct NodeProposal {
  JointId joint = JointId::Neck;
  Point3 position = Point3::Zero();
  double score = 0.0;
  int index = 0;               ///< rank in the per-joint proposal list
  std::int64_t voxel = -1;     ///< linear voxel index of the peak
};

using JointProposals = std::array<std::vector<NodeProposal>, kJointCount>;

/// Fuses per-view 2D score maps into per-joint 3D score fields:
///   H_j(Z) = (1/|V(Z)|) * sum_{c in V(Z)} h_j^c(P_c(Z)),
/// with V(Z) the cameras whose frustum contains Z. Cameras accumulate in
/// ascending id order regardless of input order or thread count, so the
/// result is bitwise deterministic. Throws std::invalid_argument for an
/// empty camera list or a degenerate grid.
ScoreVolume fuse(const ScoreMapSet& maps, const std::vector<Camera>& cameras,
                 const GridSpec& grid, int threads = 1);

/// Extracts proposals for joint j: strict 26-neighborhood local maxima with
/// score > tau (ties broken toward the lower linear voxel index), then greedy
/// suppression of any candidate within `suppression_radius_voxels` (Euclidean,
/// in voxel units) of an already accepted one. Sorted by descending score.
std::vector<NodeProposal> extract_node_proposals(const ScoreVolume& volume,
                                                 JointId joint, double tau,
                                                 int suppression_radius_voxels = 2);

/// Convenience: proposals for all 15 joints.
JointProposals extract_all_node_proposals(const ScoreVolume& volume, double tau,
                                          int suppression_radius_voxels = 2);

}  // namespace mvskel
