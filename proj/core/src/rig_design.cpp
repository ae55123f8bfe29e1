#include "mvskel/rig_design.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mvskel {

namespace {

constexpr double kPi = 3.14159265358979323846;

double angle_between(const Point3& a, const Point3& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

/// Face centers of a unit icosahedron.
std::vector<Point3> icosahedron_face_centers() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point3> vertices;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-phi, phi}) {
      vertices.emplace_back(0.0, a, b);
      vertices.emplace_back(a, b, 0.0);
      vertices.emplace_back(b, 0.0, a);
    }
  }
  for (Point3& v : vertices) v.normalize();

  // Faces are the vertex triples whose pairwise distances equal the edge
  // length (the smallest inter-vertex distance).
  double edge = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      edge = std::min(edge, (vertices[i] - vertices[j]).norm());
    }
  }
  const double tol = 1e-9;
  std::vector<Point3> centers;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      if ((vertices[i] - vertices[j]).norm() > edge + tol) continue;
      for (std::size_t k = j + 1; k < vertices.size(); ++k) {
        if ((vertices[i] - vertices[k]).norm() > edge + tol) continue;
        if ((vertices[j] - vertices[k]).norm() > edge + tol) continue;
        centers.push_back(((vertices[i] + vertices[j] + vertices[k]) / 3.0).normalized());
      }
    }
  }
  return centers;  // 20 faces
}

Mat3 rotation_between(const Point3& from, const Point3& to) {
  const double c = std::clamp(from.dot(to), -1.0, 1.0);
  if (c > 1.0 - 1e-12) return Mat3::Identity();
  Point3 axis;
  if (c < -1.0 + 1e-12) {
    axis = from.unitOrthogonal();
    return Eigen::AngleAxisd(kPi, axis).toRotationMatrix();
  }
  axis = from.cross(to).normalized();
  return Eigen::AngleAxisd(std::acos(c), axis).toRotationMatrix();
}

struct Triangle {
  Point2 a, b, c;
  Point2 centroid() const { return (a + b + c) / 3.0; }
};

/// A hexagon split into 6 equilateral triangles, each subdivided in 4.
std::vector<Triangle> hexagon_tessellation(double circumradius) {
  std::vector<Triangle> triangles;
  const Point2 center = Point2::Zero();
  for (int k = 0; k < 6; ++k) {
    const double a0 = kPi / 3.0 * k;
    const double a1 = kPi / 3.0 * (k + 1);
    const Point2 v0(circumradius * std::cos(a0), circumradius * std::sin(a0));
    const Point2 v1(circumradius * std::cos(a1), circumradius * std::sin(a1));
    const Point2 m0 = (center + v0) / 2.0;
    const Point2 m1 = (center + v1) / 2.0;
    const Point2 m2 = (v0 + v1) / 2.0;
    triangles.push_back({center, m0, m1});
    triangles.push_back({m0, v0, m2});
    triangles.push_back({m1, m2, v1});
    triangles.push_back({m0, m2, m1});
  }
  return triangles;
}

std::int64_t vertex_key(const Point2& p) {
  const auto q = [](double x) { return static_cast<std::int64_t>(std::llround(x * 1e6)); };
  return q(p.x()) * 1000003 + q(p.y());
}

}  // namespace

Point3 RigLayout::direction(int panel, int camera) const {
  const Point2& o = offsets[camera];
  const Point3 d =
      (panel_center + o.x() * tangent_u + o.y() * tangent_v).normalized();
  return panel_rotations[panel] * d;
}

RigLayout default_rig_layout() {
  RigLayout layout;
  layout.panels = 20;
  layout.cameras_per_panel = 24;

  const auto triangles = hexagon_tessellation(0.5);
  for (const Triangle& t : triangles) layout.offsets.push_back(t.centroid());

  // Edge adjacency between tessellation triangles defines the
  // 3-neighborhood: two triangles are neighbors when they share an edge.
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<int>> edge_owners;
  for (int i = 0; i < static_cast<int>(triangles.size()); ++i) {
    const Triangle& t = triangles[i];
    const std::array<std::pair<Point2, Point2>, 3> edges = {
        {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
    for (const auto& [p, q] : edges) {
      auto key = std::minmax(vertex_key(p), vertex_key(q));
      edge_owners[{key.first, key.second}].push_back(i);
    }
  }
  layout.neighbors.assign(triangles.size(), {});
  for (const auto& [_, owners] : edge_owners) {
    if (owners.size() == 2) {
      layout.neighbors[owners[0]].push_back(owners[1]);
      layout.neighbors[owners[1]].push_back(owners[0]);
    }
  }
  for (auto& n : layout.neighbors) std::sort(n.begin(), n.end());

  const auto centers = icosahedron_face_centers();
  if (static_cast<int>(centers.size()) != layout.panels) {
    throw std::logic_error("icosahedron construction did not yield 20 faces");
  }
  // Reference panel is the face nearest +z; others are reached by the
  // minimal rotation between face centers.
  int ref = 0;
  for (int i = 1; i < layout.panels; ++i) {
    if (centers[i].z() > centers[ref].z()) ref = i;
  }
  layout.panel_center = centers[ref];
  layout.tangent_u = layout.panel_center.unitOrthogonal();
  layout.tangent_v = layout.panel_center.cross(layout.tangent_u).normalized();
  layout.panel_rotations.push_back(Mat3::Identity());
  for (int i = 0; i < layout.panels; ++i) {
    if (i == ref) continue;
    layout.panel_rotations.push_back(rotation_between(layout.panel_center, centers[i]));
  }
  return layout;
}

double placement_objective(const RigLayout& layout) {
  double total = 0.0;
  std::vector<Point3> dirs(layout.cameras_per_panel);
  for (int p = 0; p < layout.panels; ++p) {
    for (int i = 0; i < layout.cameras_per_panel; ++i) dirs[i] = layout.direction(p, i);
    for (int i = 0; i < layout.cameras_per_panel; ++i) {
      const auto& nbrs = layout.neighbors[i];
      for (int j : nbrs) {
        const double aij = angle_between(dirs[i], dirs[j]);
        for (int k : nbrs) {
          if (k == j) continue;
          const double aik = angle_between(dirs[i], dirs[k]);
          total += (aij - aik) * (aij - aik);
        }
      }
    }
  }
  return total;
}

RigLayout optimize_placement(const RigLayout& layout, int max_iterations,
                             double step_tolerance, std::vector<double>* history) {
  RigLayout current = layout;
  double objective = placement_objective(current);
  if (history) {
    history->clear();
    history->push_back(objective);
  }

  const int n = current.cameras_per_panel;
  double step = 0.05;
  const double fd = 1e-7;

  for (int iter = 0; iter < max_iterations; ++iter) {
    // Central-difference gradient over the 2N shared offsets.
    std::vector<Point2> gradient(n, Point2::Zero());
    double gnorm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int axis = 0; axis < 2; ++axis) {
        RigLayout probe = current;
        probe.offsets[i][axis] += fd;
        const double up = placement_objective(probe);
        probe.offsets[i][axis] -= 2.0 * fd;
        const double down = placement_objective(probe);
        gradient[i][axis] = (up - down) / (2.0 * fd);
        gnorm2 += gradient[i][axis] * gradient[i][axis];
      }
    }
    if (gnorm2 == 0.0) break;

    bool accepted = false;
    while (step > step_tolerance) {
      RigLayout probe = current;
      for (int i = 0; i < n; ++i) probe.offsets[i] -= step * gradient[i];
      const double trial = placement_objective(probe);
      if (trial < objective) {
        current = std::move(probe);
        objective = trial;
        if (history) history->push_back(objective);
        accepted = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (step * std::sqrt(gnorm2) < step_tolerance) break;
  }
  return current;
}

std::vector<Point3> rig_camera_positions(const RigLayout& layout) {
  std::vector<Point3> positions;
  positions.reserve(static_cast<std::size_t>(layout.panels) * layout.cameras_per_panel);
  for (int p = 0; p < layout.panels; ++p) {
    for (int i = 0; i < layout.cameras_per_panel; ++i) {
      positions.push_back(layout.radius_m * layout.direction(p, i));
    }
  }
  return positions;
}

BaselineStats baseline_stats(const std::vector<Point3>& positions,
                             int neighbor_count) {
  BaselineStats stats;
  stats.min_m = std::numeric_limits<double>::infinity();
  stats.max_m = 0.0;
  double sum = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::vector<double> dists;
    dists.reserve(positions.size() - 1);
    for (std::size_t j = 0; j < positions.size(); ++j) {
      if (j != i) dists.push_back((positions[i] - positions[j]).norm());
    }
    std::sort(dists.begin(), dists.end());
    const int take = std::min<int>(neighbor_count, static_cast<int>(dists.size()));
    for (int k = 0; k < take; ++k) {
      stats.min_m = std::min(stats.min_m, dists[k]);
      stats.max_m = std::max(stats.max_m, dists[k]);
      sum += dists[k];
      ++count;
    }
  }
  stats.mean_m = count > 0 ? sum / count : 0.0;
  if (!std::isfinite(stats.min_m)) stats.min_m = 0.0;
  return stats;
}

BaselineStats report_baselines(const RigLayout& layout) {
  return baseline_stats(rig_camera_positions(layout));
}

std::vector<Camera> rig_cameras(const RigLayout& layout, double focal_px,
                                int width, int height) {
  std::vector<Camera> cameras;
  const auto positions = rig_camera_positions(layout);
  cameras.reserve(positions.size());
  for (int i = 0; i < static_cast<int>(positions.size()); ++i) {
    cameras.push_back(make_look_at_camera(i, positions[i], Point3::Zero(),
                                          focal_px, width, height));
  }
  return cameras;
}

}  // namespace mvskel
