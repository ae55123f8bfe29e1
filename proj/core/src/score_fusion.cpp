#include "mvskel/score_fusion.hpp"

#include "mvskel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvskel {

GridSpec GridSpec::from_bounds(const Point3& lo, const Point3& hi, double spacing) {
  if (spacing <= 0.0) throw std::invalid_argument("grid spacing must be positive");
  if ((hi - lo).minCoeff() < 0.0) {
    throw std::invalid_argument("grid bounds are inverted");
  }
  GridSpec grid;
  grid.spacing = spacing;
  grid.origin = lo;
  grid.nx = static_cast<int>(std::floor((hi.x() - lo.x()) / spacing)) + 1;
  grid.ny = static_cast<int>(std::floor((hi.y() - lo.y()) / spacing)) + 1;
  grid.nz = static_cast<int>(std::floor((hi.z() - lo.z()) / spacing)) + 1;
  return grid;
}

bool GridSpec::contains(const Point3& p) const {
  const Point3 rel = (p - origin) / spacing;
  return rel.x() >= -0.5 && rel.x() <= nx - 0.5 && rel.y() >= -0.5 &&
         rel.y() <= ny - 0.5 && rel.z() >= -0.5 && rel.z() <= nz - 0.5;
}

ScoreVolume::ScoreVolume(const GridSpec& grid) : grid_(grid) {
  const std::int64_t n = grid_.voxel_count();
  if (n <= 0) throw std::invalid_argument("degenerate score grid");
  for (auto& f : scores_) f.assign(n, 0.0);
  visible_.assign(n, 0);
}

namespace {

struct ViewContext {
  const Camera* camera = nullptr;
  const ViewScoreMap* map = nullptr;  // null when the view has no detections
  bool has_bounds = false;
  Point2 lo = Point2::Zero();
  Point2 hi = Point2::Zero();
};

}  // namespace

ScoreVolume fuse(const ScoreMapSet& maps, const std::vector<Camera>& cameras,
                 const GridSpec& grid, int threads) {
  if (cameras.empty()) throw std::invalid_argument("fuse: empty camera list");

  // Fixed accumulation order: ascending camera id, independent of the order
  // cameras were passed in.
  std::vector<ViewContext> views;
  views.reserve(cameras.size());
  for (const Camera& cam : cameras) views.push_back({&cam, nullptr});
  std::sort(views.begin(), views.end(), [](const ViewContext& a, const ViewContext& b) {
    return a.camera->id < b.camera->id;
  });
  for (std::size_t i = 1; i < views.size(); ++i) {
    if (views[i].camera->id == views[i - 1].camera->id) {
      throw std::invalid_argument("fuse: duplicate camera id " +
                                  std::to_string(views[i].camera->id));
    }
  }
  for (ViewContext& v : views) {
    v.map = maps.view(v.camera->id);
    if (v.map) v.has_bounds = v.map->score_bounds(v.lo, v.hi);
  }

  ScoreVolume volume(grid);
  std::array<std::vector<double>*, kJointCount> fields;
  for (int j = 0; j < kJointCount; ++j) {
    fields[j] = &volume.field(static_cast<JointId>(j));
  }
  std::vector<std::uint16_t>& visible = volume.visible_counts();

  parallel_for(0, grid.voxel_count(), threads, [&](std::int64_t lo, std::int64_t hi) {
    std::array<double, kJointCount> acc{};
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      const auto [ix, iy, iz] = grid.coords(idx);
      const Point3 center = grid.center(ix, iy, iz);
      acc.fill(0.0);
      int count = 0;
      for (const ViewContext& v : views) {
        const auto pixel = try_project(*v.camera, center);
        if (!pixel) continue;
        const double u = pixel->x();
        const double w = pixel->y();
        if (u < 0.0 || u >= v.camera->width || w < 0.0 || w >= v.camera->height) {
          continue;
        }
        ++count;
        // Outside the blob bounding box every joint scores exactly 0, and
        // adding 0.0 leaves the accumulators unchanged bit for bit.
        if (!v.map || !v.has_bounds) continue;
        if (u < v.lo.x() || u > v.hi.x() || w < v.lo.y() || w > v.hi.y()) continue;
        for (int j = 0; j < kJointCount; ++j) {
          acc[j] += v.map->merged_score(static_cast<JointId>(j), *pixel);
        }
      }
      visible[idx] = static_cast<std::uint16_t>(count);
      if (count > 0) {
        const double inv = 1.0 / count;
        for (int j = 0; j < kJointCount; ++j) {
          (*fields[j])[idx] = acc[j] * inv;
        }
      }
    }
  });
  return volume;
}

namespace {

/// Strict local maximum over the 26-neighborhood; on equal scores the voxel
/// with the lower linear index wins.
bool is_local_max(const std::vector<double>& field, const GridSpec& grid,
                  int ix, int iy, int iz, std::int64_t idx) {
  const double s = field[idx];
  for (int dx = -1; dx <= 1; ++dx) {
    const int x = ix + dx;
    if (x < 0 || x >= grid.nx) continue;
    for (int dy = -1; dy <= 1; ++dy) {
      const int y = iy + dy;
      if (y < 0 || y >= grid.ny) continue;
      for (int dz = -1; dz <= 1; ++dz) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int z = iz + dz;
        if (z < 0 || z >= grid.nz) continue;
        const std::int64_t nidx = grid.linear_index(x, y, z);
        const double ns = field[nidx];
        if (ns > s || (ns == s && nidx < idx)) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<NodeProposal> extract_node_proposals(const ScoreVolume& volume,
                                                 JointId joint, double tau,
                                                 int suppression_radius_voxels) {
  const GridSpec& grid = volume.grid();
  const std::vector<double>& field = volume.field(joint);

  std::vector<NodeProposal> candidates;
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int iz = 0; iz < grid.nz; ++iz) {
        const std::int64_t idx = grid.linear_index(ix, iy, iz);
        if (field[idx] <= tau) continue;
        if (!is_local_max(field, grid, ix, iy, iz, idx)) continue;
        NodeProposal p;
        p.joint = joint;
        p.position = grid.center(ix, iy, iz);
        p.score = field[idx];
        p.voxel = idx;
        candidates.push_back(p);
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const NodeProposal& a, const NodeProposal& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.voxel < b.voxel;
            });

  // Greedy radius suppression: one joint cannot produce two peaks within the
  // joint's physical extent.
  const std::int64_t r2 =
      static_cast<std::int64_t>(suppression_radius_voxels) * suppression_radius_voxels;
  std::vector<NodeProposal> kept;
  for (const NodeProposal& cand : candidates) {
    const auto cc = grid.coords(cand.voxel);
    bool suppressed = false;
    for (const NodeProposal& k : kept) {
      const auto kc = grid.coords(k.voxel);
      const std::int64_t dx = cc[0] - kc[0];
      const std::int64_t dy = cc[1] - kc[1];
      const std::int64_t dz = cc[2] - kc[2];
      if (dx * dx + dy * dy + dz * dz <= r2) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  for (int i = 0; i < static_cast<int>(kept.size()); ++i) kept[i].index = i;
  return kept;
}

JointProposals extract_all_node_proposals(const ScoreVolume& volume, double tau,
                                          int suppression_radius_voxels) {
  JointProposals out;
  for (int j = 0; j < kJointCount; ++j) {
    out[j] = extract_node_proposals(volume, static_cast<JointId>(j), tau,
                                    suppression_radius_voxels);
  }
  return out;
}

}  // namespace mvskel
