#pragma once

#include "mvskel/geometry.hpp"

#include <vector>

namespace mvskel {

/// Camera placement over a panelized geodesic dome. All panels share one
/// camera pattern: per-camera 2D offsets on the reference panel's tangent
/// plane, realized on panel p through that panel's rotation. A camera's
/// direction is normalize(panel_center + x * tangent_u + y * tangent_v)
/// rotated by the panel transform; positions sit at radius_m along it.
struct RigLayout {
  int panels = 20;
  int cameras_per_panel = 24;
  double radius_m = 2.745;

  std::vector<Point2> offsets;             ///< per camera on the reference panel
  std::vector<std::vector<int>> neighbors; ///< symmetric, <= 3 per camera
  std::vector<Mat3> panel_rotations;       ///< [0] is the identity

  Point3 panel_center = Point3::UnitZ();   ///< reference panel center direction
  Point3 tangent_u = Point3::UnitX();
  Point3 tangent_v = Point3::UnitY();

  /// Unit viewing direction of camera i realized on panel p.
  Point3 direction(int panel, int camera) const;
};

/// The default dome: 20 hexagonal panels on icosahedron face centers, each
/// carrying 24 cameras initialized on the centroids of a 24-triangle
/// tessellation of the hexagon, with edge-adjacency neighborhoods.
RigLayout default_rig_layout();

/// Sum over panels, cameras and ordered neighbor pairs (j, k), j != k, of
/// (angle(i,j) - angle(i,k))^2, angles at the dome center in radians.
double placement_objective(const RigLayout& layout);

/// Gradient descent with backtracking on the shared per-camera offsets. The
/// objective never increases across iterations; when `history` is given it
/// receives the objective after every accepted step (starting value first).
RigLayout optimize_placement(const RigLayout& layout, int max_iterations = 400,
                             double step_tolerance = 1e-10,
                             std::vector<double>* history = nullptr);

/// All camera positions (panels realized), at radius_m from the center.
std::vector<Point3> rig_camera_positions(const RigLayout& layout);

struct BaselineStats {
  double min_m = 0.0;
  double mean_m = 0.0;
  double max_m = 0.0;
};

/// Euclidean distance statistics between each camera and its up-to-
/// `neighbor_count` nearest peers.
BaselineStats baseline_stats(const std::vector<Point3>& positions,
                             int neighbor_count = 3);

/// baseline_stats over the realized layout.
BaselineStats report_baselines(const RigLayout& layout);

/// Exports the layout as calibrated cameras aimed at the dome center,
/// consumable as a scene-synth camera override.
std::vector<Camera> rig_cameras(const RigLayout& layout, double focal_px = 400.0,
                                int width = 640, int height = 480);

}  // namespace mvskel
