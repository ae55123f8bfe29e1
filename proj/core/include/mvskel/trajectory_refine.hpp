#pragma once

#include "mvskel/body_model.hpp"
#include "mvskel/geometry.hpp"
#include "mvskel/skeleton_assembly.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace mvskel {

/// A calibrated depth raster. Depths are camera-frame z in meters; 0 marks an
/// invalid pixel.
struct DepthMap {
  Camera sensor;
  int frame = 0;
  int width = 0;
  int height = 0;
  std::vector<float> depth;  ///< row-major, width * height

  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

/// A small oriented surface element (6cm x 6cm) with a unit normal.
struct Patch {
  static constexpr double kExtentM = 0.06;
  Point3 center = Point3::Zero();
  Point3 normal = Point3::UnitZ();
};

/// A patch tracked over a contiguous frame range.
struct PatchTrajectory {
  int id = 0;
  int start_frame = 0;
  std::vector<Point3> centers;
  std::vector<Point3> normals;

  int end_frame() const { return start_frame + static_cast<int>(centers.size()); }
  bool valid_at(int frame) const {
    return frame >= start_frame && frame < end_frame();
  }
  const Point3& center_at(int frame) const { return centers[frame - start_frame]; }
  const Point3& normal_at(int frame) const { return normals[frame - start_frame]; }
};

/// One bone of one person over time; endpoints may be missing per frame.
struct PartTrajectory {
  int person = -1;
  int bone = 0;  ///< index into SkeletonTopology::bones()
  /// Per frame: (parent endpoint, child endpoint), or nullopt when missing.
  std::vector<std::optional<std::pair<Point3, Point3>>> endpoints;
  /// Ids of associated patch trajectories (F_uv).
  std::vector<int> patches;

  int frame_count() const { return static_cast<int>(endpoints.size()); }
  bool present(int frame) const {
    return frame >= 0 && frame < frame_count() && endpoints[frame].has_value();
  }
};

struct PatchInitOptions {
  double neighbor_radius_m = Patch::kExtentM;
  int min_neighbors = 6;
};

/// Back-projects all valid depth pixels of one frame into a point cloud and
/// fits a patch at every point with enough neighbors: the normal is the least
/// principal axis of the neighborhood, flipped toward the observing sensor.
std::vector<Patch> init_patches(const std::vector<DepthMap>& depth_maps,
                                const PatchInitOptions& options = {});

/// Marks a part frame MISSING when, in any depth view, both endpoints project
/// onto valid depth pixels and are closer to the sensor than the measured
/// depth minus `margin_m`: the part floats in observed free space.
void remove_outlier_parts(std::vector<PartTrajectory>& parts,
                          const std::vector<std::vector<DepthMap>>& depth_per_frame,
                          double margin_m = 0.05);

struct SegmentDistance {
  double distance = 0.0;  ///< meters
  double alpha = 0.0;     ///< clamped to [0, 1]; endpoint A at alpha = 1
  bool interior = false;  ///< true when the unclamped foot lies on the segment
};

/// Orthogonal distance from `f` to the segment alpha*A + (1-alpha)*B over
/// alpha in [0, 1]. Throws std::invalid_argument when A == B.
SegmentDistance segment_distance(const Point3& f, const Point3& a, const Point3& b);

/// Range (max - min over overlapping valid frames) of the patch-to-segment
/// distance; zero when the patch moves rigidly with the part. Returns nullopt
/// when the overlap is shorter than 2 frames.
std::optional<double> rigidity_cost(const PatchTrajectory& patch,
                                    const PartTrajectory& part);

struct AssociationOptions {
  double rigidity_threshold_m = 0.10;
};

/// Assigns patch trajectories to parts. A patch is a candidate for a part
/// when (a) at every overlapping frame the vector from the segment foot point
/// to the patch center has positive inner product with the patch normal,
/// (b) the unclamped foot lies on the segment at some overlapping frame, and
/// (c) the rigidity cost is within threshold. A patch claimed by several
/// parts goes to the one minimizing max_t of the segment distance; every
/// patch labels at most one part. Results are written into part.patches.
void associate(const std::vector<PatchTrajectory>& stream,
               std::vector<PartTrajectory>& parts,
               const AssociationOptions& options = {});

/// Least-squares rigid alignment of patch centers valid at both frames.
/// Returns nullopt for fewer than 3 usable patches or a collinear
/// configuration. With >= 6 patches one 2-sigma residual trimming round
/// rejects stragglers before the final fit.
std::optional<RigidTransform> estimate_transform(
    const std::vector<PatchTrajectory>& stream, const std::vector<int>& patch_ids,
    int frame_from, int frame_to);

/// Point-set flavor used by estimate_transform and directly by tests.
std::optional<RigidTransform> estimate_rigid(const std::vector<Point3>& source,
                                             const std::vector<Point3>& target);

struct RefineParameters {
  int propagation_window = 1;  ///< the n of the propagated-proposal set
  int max_iterations = 10;
  AssociationOptions association;
};

/// Temporal refinement: at every frame, replace a part with the mean of the
/// available set {T(t|t-n) P(t-n), ..., P(t), ..., T(t|t+n) P(t+n)}; frames
/// with an empty set stay missing. Iterates (with patch re-association each
/// round) until an iteration fills no new frame or max_iterations is hit.
/// Each iteration reads the previous iteration's trajectories.
std::vector<PartTrajectory> refine_parts(const std::vector<PartTrajectory>& parts,
                                         const std::vector<PatchTrajectory>& stream,
                                         const RefineParameters& params = {});

/// Builds per-(person, bone) part trajectories from associated skeletons.
std::vector<PartTrajectory> make_part_trajectories(
    const std::vector<SkeletonTrajectory>& trajectories,
    const SkeletonTopology& topology, int frame_count);

/// Writes refined parts back into the skeletons: every joint takes the mean
/// of its per-bone endpoint copies; frames a person was missing from are
/// created when refinement recovered any of their parts.
void apply_part_trajectories(std::vector<SkeletonTrajectory>& trajectories,
                             const std::vector<PartTrajectory>& parts,
                             const SkeletonTopology& topology);

}  // namespace mvskel
