#include "mvskel/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace mvskel {

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

Point3 apply_transform(const RigidTransform& transform, const Point3& p) {
  return transform * p;
}

Mat3 axis_angle_rotation(const Point3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

void Camera::validate() const {
  const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).norm();
  if (ortho > 1e-9) {
    throw std::invalid_argument("camera " + std::to_string(id) +
                                ": rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("camera " + std::to_string(id) +
                                ": rotation determinant is not +1");
  }
  if (intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0) {
    throw std::invalid_argument("camera " + std::to_string(id) +
                                ": focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("camera " + std::to_string(id) +
                                ": image size must be positive");
  }
}

Point2 distort_normalized(const std::array<double, 5>& dist, const Point2& xn) {
  const double k1 = dist[0], k2 = dist[1], p1 = dist[2], p2 = dist[3], k3 = dist[4];
  const double x = xn.x();
  const double y = xn.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
  return {xd, yd};
}

Point2 undistort_normalized(const std::array<double, 5>& dist, const Point2& xd) {
  // Fixed-point iteration: invert the forward model around the observed point.
  Point2 xn = xd;
  for (int i = 0; i < 30; ++i) {
    const Point2 fwd = distort_normalized(dist, xn);
    const Point2 next = xn + (xd - fwd);
    if ((next - xn).norm() < 1e-14) return next;
    xn = next;
  }
  return xn;
}

std::optional<Point2> try_project(const Camera& camera, const Point3& p) {
  const Point3 pc = camera.to_camera(p);
  if (pc.z() <= 0.0) return std::nullopt;
  const Point2 xn(pc.x() / pc.z(), pc.y() / pc.z());
  const Point2 xd = distort_normalized(camera.distortion, xn);
  const Mat3& K = camera.intrinsics;
  const double u = K(0, 0) * xd.x() + K(0, 1) * xd.y() + K(0, 2);
  const double v = K(1, 1) * xd.y() + K(1, 2);
  return Point2(u, v);
}

Point2 project(const Camera& camera, const Point3& p) {
  const auto pixel = try_project(camera, p);
  if (!pixel) {
    throw BehindCameraError("point has non-positive depth in camera " +
                            std::to_string(camera.id));
  }
  return *pixel;
}

bool is_visible(const Camera& camera, const Point3& p) {
  const auto pixel = try_project(camera, p);
  if (!pixel) return false;
  return pixel->x() >= 0.0 && pixel->x() < static_cast<double>(camera.width) &&
         pixel->y() >= 0.0 && pixel->y() < static_cast<double>(camera.height);
}

Point3 back_project(const Camera& camera, const Point2& pixel, double depth) {
  const Mat3& K = camera.intrinsics;
  const double yd = (pixel.y() - K(1, 2)) / K(1, 1);
  const double xd = (pixel.x() - K(0, 2) - K(0, 1) * yd) / K(0, 0);
  const Point2 xn = undistort_normalized(camera.distortion, {xd, yd});
  const Point3 pc(xn.x() * depth, xn.y() * depth, depth);
  return camera.rotation.transpose() * (pc - camera.translation);
}

Camera make_look_at_camera(int id, const Point3& position, const Point3& target,
                           double focal_px, int width, int height,
                           const Point3& up_hint) {
  Camera cam;
  cam.id = id;
  cam.width = width;
  cam.height = height;
  cam.intrinsics = Mat3::Identity();
  cam.intrinsics(0, 0) = focal_px;
  cam.intrinsics(1, 1) = focal_px;
  cam.intrinsics(0, 2) = 0.5 * width;
  cam.intrinsics(1, 2) = 0.5 * height;

  Point3 forward = (target - position).normalized();
  Point3 up = up_hint;
  if (std::abs(forward.dot(up.normalized())) > 0.999) {
    up = Point3(1.0, 0.0, 0.0);
  }
  const Point3 right = forward.cross(up).normalized();
  const Point3 down = forward.cross(right).normalized();

  // Rows of R are the camera axes expressed in world coordinates.
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -(cam.rotation * position);
  return cam;
}

}  // namespace mvskel
