#include "mvskel/trajectory_refine.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace mvskel {

namespace {

std::uint64_t cell_key(int x, int y, int z) {
  const std::uint64_t bias = 1u << 20;
  return ((static_cast<std::uint64_t>(x) + bias) & 0x1FFFFF) |
         (((static_cast<std::uint64_t>(y) + bias) & 0x1FFFFF) << 21) |
         (((static_cast<std::uint64_t>(z) + bias) & 0x1FFFFF) << 42);
}

}  // namespace

std::vector<Patch> init_patches(const std::vector<DepthMap>& depth_maps,
                                const PatchInitOptions& options) {
  if (depth_maps.empty()) {
    throw std::invalid_argument("init_patches: no depth maps given");
  }

  // Merged cloud across sensors, remembering the observing sensor per point.
  std::vector<Point3> points;
  std::vector<int> source_map;
  for (int m = 0; m < static_cast<int>(depth_maps.size()); ++m) {
    const DepthMap& map = depth_maps[m];
    for (int v = 0; v < map.height; ++v) {
      for (int u = 0; u < map.width; ++u) {
        const float d = map.at(u, v);
        if (d <= 0.0f || !std::isfinite(d)) continue;
        points.push_back(back_project(map.sensor, Point2(u, v), d));
        source_map.push_back(m);
      }
    }
  }

  const double radius = options.neighbor_radius_m;
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  grid.reserve(points.size());
  const auto cell_of = [&](const Point3& p) {
    return std::array<int, 3>{static_cast<int>(std::floor(p.x() / radius)),
                              static_cast<int>(std::floor(p.y() / radius)),
                              static_cast<int>(std::floor(p.z() / radius))};
  };
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    const auto c = cell_of(points[i]);
    grid[cell_key(c[0], c[1], c[2])].push_back(i);
  }

  std::vector<Patch> patches;
  std::vector<int> neighborhood;
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    const Point3& p = points[i];
    neighborhood.clear();
    const auto c = cell_of(p);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(cell_key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == grid.end()) continue;
          for (int k : it->second) {
            if (k == i) continue;
            if ((points[k] - p).norm() <= radius) neighborhood.push_back(k);
          }
        }
      }
    }
    if (static_cast<int>(neighborhood.size()) < options.min_neighbors) continue;

    Point3 mean = p;
    for (int k : neighborhood) mean += points[k];
    mean /= static_cast<double>(neighborhood.size() + 1);

    Mat3 cov = Mat3::Zero();
    {
      const Point3 d0 = p - mean;
      cov += d0 * d0.transpose();
    }
    for (int k : neighborhood) {
      const Point3 d = points[k] - mean;
      cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Point3 normal = eig.eigenvectors().col(0);  // least principal axis
    const Point3 ray = p - depth_maps[source_map[i]].sensor.center();
    if (normal.dot(ray) > 0.0) normal = -normal;

    Patch patch;
    patch.center = p;
    patch.normal = normal.normalized();
    patches.push_back(patch);
  }
  return patches;
}

void remove_outlier_parts(std::vector<PartTrajectory>& parts,
                          const std::vector<std::vector<DepthMap>>& depth_per_frame,
                          double margin_m) {
  const auto in_free_space = [&](const DepthMap& map, const Point3& p) {
    const auto pixel = try_project(map.sensor, p);
    if (!pixel) return false;
    const int u = static_cast<int>(std::lround(pixel->x()));
    const int v = static_cast<int>(std::lround(pixel->y()));
    if (!map.in_bounds(u, v)) return false;
    const float measured = map.at(u, v);
    if (measured <= 0.0f) return false;  // no evidence from this view
    return map.sensor.depth_of(p) < static_cast<double>(measured) - margin_m;
  };

  for (PartTrajectory& part : parts) {
    const int frames = std::min<int>(part.frame_count(),
                                     static_cast<int>(depth_per_frame.size()));
    for (int t = 0; t < frames; ++t) {
      if (!part.present(t)) continue;
      const auto& [a, b] = *part.endpoints[t];
      for (const DepthMap& map : depth_per_frame[t]) {
        if (in_free_space(map, a) && in_free_space(map, b)) {
          part.endpoints[t] = std::nullopt;
          break;
        }
      }
    }
  }
}

SegmentDistance segment_distance(const Point3& f, const Point3& a, const Point3& b) {
  const Point3 axis = a - b;
  const double len2 = axis.squaredNorm();
  if (len2 == 0.0) {
    throw std::invalid_argument("segment_distance: degenerate part (A == B)");
  }
  const double alpha_unclamped = (f - b).dot(axis) / len2;
  const double alpha = std::clamp(alpha_unclamped, 0.0, 1.0);
  SegmentDistance out;
  out.alpha = alpha;
  out.interior = alpha_unclamped >= 0.0 && alpha_unclamped <= 1.0;
  out.distance = (alpha * a + (1.0 - alpha) * b - f).norm();
  return out;
}

std::optional<double> rigidity_cost(const PatchTrajectory& patch,
                                    const PartTrajectory& part) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  int overlap = 0;
  for (int t = std::max(patch.start_frame, 0);
       t < std::min(patch.end_frame(), part.frame_count()); ++t) {
    if (!part.present(t)) continue;
    const auto& [a, b] = *part.endpoints[t];
    const double l = segment_distance(patch.center_at(t), a, b).distance;
    lo = std::min(lo, l);
    hi = std::max(hi, l);
    ++overlap;
  }
  if (overlap < 2) return std::nullopt;
  return hi - lo;
}

void associate(const std::vector<PatchTrajectory>& stream,
               std::vector<PartTrajectory>& parts,
               const AssociationOptions& options) {
  for (PartTrajectory& part : parts) part.patches.clear();

  for (const PatchTrajectory& patch : stream) {
    double best_max_l = std::numeric_limits<double>::infinity();
    int best_part = -1;
    for (int p = 0; p < static_cast<int>(parts.size()); ++p) {
      const PartTrajectory& part = parts[p];
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      bool interior_somewhere = false;
      bool normal_ok = true;
      int overlap = 0;
      for (int t = std::max(patch.start_frame, 0);
           t < std::min(patch.end_frame(), part.frame_count()); ++t) {
        if (!part.present(t)) continue;
        const auto& [a, b] = *part.endpoints[t];
        const SegmentDistance sd = segment_distance(patch.center_at(t), a, b);
        const Point3 foot = sd.alpha * a + (1.0 - sd.alpha) * b;
        if ((patch.center_at(t) - foot).dot(patch.normal_at(t)) <= 0.0) {
          normal_ok = false;
          break;
        }
        interior_somewhere = interior_somewhere || sd.interior;
        lo = std::min(lo, sd.distance);
        hi = std::max(hi, sd.distance);
        ++overlap;
      }
      if (!normal_ok || !interior_somewhere || overlap < 2) continue;
      if (hi - lo > options.rigidity_threshold_m) continue;
      if (hi < best_max_l) {
        best_max_l = hi;
        best_part = p;
      }
    }
    if (best_part >= 0) parts[best_part].patches.push_back(patch.id);
  }
}

std::optional<RigidTransform> estimate_rigid(const std::vector<Point3>& source,
                                             const std::vector<Point3>& target) {
  if (source.size() != target.size() || source.size() < 3) return std::nullopt;
  const int n = static_cast<int>(source.size());

  Point3 mean = Point3::Zero();
  for (const Point3& p : source) mean += p;
  mean /= n;
  Mat3 cov = Mat3::Zero();
  for (const Point3& p : source) {
    const Point3 d = p - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const double largest = eig.eigenvalues()(2);
  const double second = eig.eigenvalues()(1);
  if (largest <= 0.0 || second / largest <= 1e-6) return std::nullopt;

  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (int i = 0; i < n; ++i) {
    src.col(i) = source[i];
    dst.col(i) = target[i];
  }
  const Eigen::Matrix4d m = Eigen::umeyama(src, dst, false);
  RigidTransform out;
  out.rotation = m.topLeftCorner<3, 3>();
  out.translation = m.topRightCorner<3, 1>();
  return out;
}

std::optional<RigidTransform> estimate_transform(
    const std::vector<PatchTrajectory>& stream, const std::vector<int>& patch_ids,
    int frame_from, int frame_to) {
  std::unordered_map<int, const PatchTrajectory*> by_id;
  by_id.reserve(stream.size());
  for (const PatchTrajectory& p : stream) by_id[p.id] = &p;

  std::vector<Point3> src, dst;
  for (int id : patch_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    const PatchTrajectory& p = *it->second;
    if (!p.valid_at(frame_from) || !p.valid_at(frame_to)) continue;
    src.push_back(p.center_at(frame_from));
    dst.push_back(p.center_at(frame_to));
  }

  auto fit = estimate_rigid(src, dst);
  if (!fit) return std::nullopt;

  if (src.size() >= 6) {
    std::vector<double> residuals(src.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      residuals[i] = (*fit * src[i] - dst[i]).norm();
      mean += residuals[i];
    }
    mean /= static_cast<double>(src.size());
    double var = 0.0;
    for (double r : residuals) var += (r - mean) * (r - mean);
    const double sigma = std::sqrt(var / static_cast<double>(src.size()));
    const double cutoff = mean + 2.0 * sigma + 1e-12;

    std::vector<Point3> src_kept, dst_kept;
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (residuals[i] <= cutoff) {
        src_kept.push_back(src[i]);
        dst_kept.push_back(dst[i]);
      }
    }
    if (src_kept.size() < src.size() && src_kept.size() >= 3) {
      const auto refit = estimate_rigid(src_kept, dst_kept);
      if (refit) return refit;
    }
  }
  return fit;
}

namespace {

/// Chained transform carrying frame `from` to frame `to` via per-step
/// transforms steps[t] = T(t+1 | t). Nullopt when any link is missing.
std::optional<RigidTransform> chain_transform(
    const std::vector<std::optional<RigidTransform>>& steps, int from, int to) {
  RigidTransform total = RigidTransform::identity();
  if (from == to) return total;
  if (from < to) {
    for (int t = from; t < to; ++t) {
      if (!steps[t]) return std::nullopt;
      total = *steps[t] * total;
    }
  } else {
    for (int t = from - 1; t >= to; --t) {
      if (!steps[t]) return std::nullopt;
      total = steps[t]->inverse() * total;
    }
  }
  return total;
}

}  // namespace

std::vector<PartTrajectory> refine_parts(const std::vector<PartTrajectory>& parts,
                                         const std::vector<PatchTrajectory>& stream,
                                         const RefineParameters& params) {
  std::vector<PartTrajectory> current = parts;
  const int n = params.propagation_window;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    associate(stream, current, params.association);

    std::vector<PartTrajectory> next = current;
    bool filled_any = false;

    for (std::size_t p = 0; p < current.size(); ++p) {
      const PartTrajectory& part = current[p];
      const int frames = part.frame_count();
      if (frames == 0) continue;

      // Per-step transforms T(t+1|t) from the associated patches.
      std::vector<std::optional<RigidTransform>> steps(std::max(frames - 1, 0));
      for (int t = 0; t + 1 < frames; ++t) {
        steps[t] = estimate_transform(stream, part.patches, t, t + 1);
      }

      for (int t = 0; t < frames; ++t) {
        Point3 sum_a = Point3::Zero();
        Point3 sum_b = Point3::Zero();
        int count = 0;
        for (int offset = -n; offset <= n; ++offset) {
          const int source = t + offset;
          if (source < 0 || source >= frames) continue;
          if (!part.present(source)) continue;
          const auto transform = chain_transform(steps, source, t);
          if (!transform) continue;
          const auto& [a, b] = *part.endpoints[source];
          sum_a += *transform * a;
          sum_b += *transform * b;
          ++count;
        }
        if (count == 0) {
          next[p].endpoints[t] = std::nullopt;
          continue;
        }
        next[p].endpoints[t] =
            std::make_pair(sum_a / count, sum_b / count);
        if (!part.present(t)) filled_any = true;
      }
    }

    current = std::move(next);
    if (!filled_any) break;
  }
  return current;
}

std::vector<PartTrajectory> make_part_trajectories(
    const std::vector<SkeletonTrajectory>& trajectories,
    const SkeletonTopology& topology, int frame_count) {
  std::vector<PartTrajectory> parts;
  for (const SkeletonTrajectory& trajectory : trajectories) {
    for (int b = 0; b < topology.bone_count(); ++b) {
      const Bone& bone = topology.bones()[b];
      PartTrajectory part;
      part.person = trajectory.person;
      part.bone = b;
      part.endpoints.assign(frame_count, std::nullopt);
      for (const auto& [frame, skeleton] : trajectory.frames) {
        if (frame < 0 || frame >= frame_count) continue;
        const SkeletonJoint& ju = skeleton.joint(bone.parent);
        const SkeletonJoint& jv = skeleton.joint(bone.child);
        if (ju.missing || jv.missing) continue;
        part.endpoints[frame] = std::make_pair(ju.position, jv.position);
      }
      parts.push_back(std::move(part));
    }
  }
  return parts;
}

void apply_part_trajectories(std::vector<SkeletonTrajectory>& trajectories,
                             const std::vector<PartTrajectory>& parts,
                             const SkeletonTopology& topology) {
  for (SkeletonTrajectory& trajectory : trajectories) {
    std::vector<const PartTrajectory*> own;
    int frame_count = 0;
    for (const PartTrajectory& part : parts) {
      if (part.person != trajectory.person) continue;
      own.push_back(&part);
      frame_count = std::max(frame_count, part.frame_count());
    }
    if (own.empty()) continue;

    for (int t = 0; t < frame_count; ++t) {
      // A joint shared by several bones takes the mean of its per-bone copies.
      std::array<Point3, kJointCount> sums;
      sums.fill(Point3::Zero());
      std::array<int, kJointCount> counts{};
      for (const PartTrajectory* part : own) {
        if (!part->present(t)) continue;
        const Bone& bone = topology.bones()[part->bone];
        const auto& [a, b] = *part->endpoints[t];
        sums[joint_index(bone.parent)] += a;
        counts[joint_index(bone.parent)] += 1;
        sums[joint_index(bone.child)] += b;
        counts[joint_index(bone.child)] += 1;
      }
      bool any = false;
      for (int c : counts) any = any || c > 0;
      if (!any) continue;

      auto it = trajectory.frames.find(t);
      if (it == trajectory.frames.end()) {
        Skeleton fresh;
        fresh.person = trajectory.person;
        it = trajectory.frames.emplace(t, std::move(fresh)).first;
      }
      Skeleton& skeleton = it->second;
      for (int j = 0; j < kJointCount; ++j) {
        if (counts[j] == 0) continue;
        SkeletonJoint& sj = skeleton.joints[j];
        sj.position = sums[j] / counts[j];
        sj.missing = false;
      }
    }
  }
}

}  // namespace mvskel
