#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <stdexcept>

namespace mvskel {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid body motion (rotation + translation), an element of SE(3).
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Point3 translation = Point3::Zero();

  static RigidTransform identity() { return {}; }

  RigidTransform inverse() const;

  /// Composition: (a * b)(p) == a(b(p)).
  RigidTransform operator*(const RigidTransform& rhs) const;

  Point3 operator*(const Point3& p) const { return rotation * p + translation; }
};

Point3 apply_transform(const RigidTransform& transform, const Point3& p);

/// Rotation by `angle_rad` around a (not necessarily unit) axis.
Mat3 axis_angle_rotation(const Point3& axis, double angle_rad);

struct BehindCameraError : std::domain_error {
  explicit BehindCameraError(const std::string& what) : std::domain_error(what) {}
};

/// Calibrated pinhole camera with Brown distortion.
///
/// Extrinsics map world to camera coordinates: x_cam = R * x_world + t.
/// Distortion coefficients are ordered (k1, k2, p1, p2, k3): three radial and
/// two tangential terms, applied to normalized coordinates before the
/// intrinsic matrix. World units are meters, image units pixels.
struct Camera {
  int id = 0;
  Mat3 intrinsics = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();
  Point3 translation = Point3::Zero();
  std::array<double, 5> distortion{};
  int width = 0;
  int height = 0;

  /// Camera center in world coordinates, -R^T t.
  Point3 center() const { return -(rotation.transpose() * translation); }

  Point3 to_camera(const Point3& p) const { return rotation * p + translation; }

  /// Depth along the optical axis (camera-frame z).
  double depth_of(const Point3& p) const {
    return rotation.row(2).dot(p) + translation.z();
  }

  /// Throws std::invalid_argument if the calibration is malformed
  /// (non-orthonormal R, det != +1, non-positive focal lengths or size).
  void validate() const;
};

/// Applies the Brown distortion polynomial to normalized coordinates.
Point2 distort_normalized(const std::array<double, 5>& dist, const Point2& xn);

/// Inverts distort_normalized by fixed-point iteration.
Point2 undistort_normalized(const std::array<double, 5>& dist, const Point2& xd);

/// Projects a world point into the image. Throws BehindCameraError when the
/// point has non-positive depth.
Point2 project(const Camera& camera, const Point3& p);

/// Projection that reports failure as nullopt instead of throwing.
std::optional<Point2> try_project(const Camera& camera, const Point3& p);

/// Frustum membership: positive depth and projected pixel inside
/// [0, width) x [0, height). Occlusion is not modeled.
bool is_visible(const Camera& camera, const Point3& p);

/// Back-projects a pixel at the given camera-frame depth to a world point.
Point3 back_project(const Camera& camera, const Point2& pixel, double depth);

/// Builds a camera at `position` looking at `target` (optical axis through
/// the target), with square pixels, centered principal point and zero
/// distortion. `up_hint` resolves the roll; it must not be parallel to the
/// viewing direction.
Camera make_look_at_camera(int id, const Point3& position, const Point3& target,
                           double focal_px, int width, int height,
                           const Point3& up_hint = Point3(0.0, 0.0, 1.0));

}  // namespace mvskel
