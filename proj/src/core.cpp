#include "aerial/core.hpp"

#include <cmath>
#include <stdexcept>

namespace aerial {

double SceneFrame::surface_z(const Vec2& xy) const {
  const double dx = xy.x() - earth_center.x();
  const double dy = xy.y() - earth_center.y();
  const double h2 = earth_radius * earth_radius - dx * dx - dy * dy;
  if (h2 <= 0.0) return earth_center.z();
  return earth_center.z() + std::sqrt(h2);
}

bool is_rotation(const Mat3& r, double tolerance) {
  if (!r.allFinite()) return false;
  const double orth = (r.transpose() * r - Mat3::Identity()).norm();
  return orth < tolerance && std::abs(r.determinant() - 1.0) < tolerance * 10.0;
}

void validate(const CameraPose& pose) {
  const std::string who = "camera '" + pose.id + "': ";
  if (!is_rotation(pose.rotation)) throw DataError(who + "rotation is not orthonormal with det +1");
  if (!pose.translation.allFinite() || !std::isfinite(pose.time))
    throw DataError(who + "non-finite translation or time");
  if (pose.width <= 0 || pose.height <= 0) throw DataError(who + "image size must be positive");
  if (!(pose.fx > 0.0) || !(pose.fy > 0.0)) throw DataError(who + "focal lengths must be positive");
  if (!(pose.cx >= 0.0 && pose.cx < pose.width) || !(pose.cy >= 0.0 && pose.cy < pose.height))
    throw DataError(who + "principal point outside image");
}

void validate(const SceneFrame& frame) {
  if (!(frame.earth_radius > 0.0)) throw DataError("scene frame: earth_radius must be positive");
  if (!(frame.building_height >= 0.0)) throw DataError("scene frame: building_height must be >= 0");
  if (!(frame.foreground_radius > 0.0)) throw DataError("scene frame: foreground_radius must be positive");
  if (!frame.earth_center.allFinite()) throw DataError("scene frame: non-finite earth_center");
}

Vec3 camera_direction_world(const CameraPose& pose) {
  return (pose.rotation * Vec3::UnitZ()).normalized();
}

Ray pixel_ray(const CameraPose& pose, double px, double py) {
  if (!(px >= 0.0 && px < pose.width && py >= 0.0 && py < pose.height))
    throw std::out_of_range("pixel (" + std::to_string(px) + ", " + std::to_string(py) +
                            ") outside " + std::to_string(pose.width) + "x" +
                            std::to_string(pose.height) + " image");
  const Vec3 local((px - pose.cx) / pose.fx, (py - pose.cy) / pose.fy, 1.0);
  return {pose.translation, (pose.rotation * local).normalized()};
}

bool project_point(const CameraPose& pose, const Vec3& world, Vec2& pixel) {
  const Vec3 local = pose.rotation.transpose() * (world - pose.translation);
  if (!(local.z() > 0.0)) return false;
  pixel = Vec2(pose.fx * local.x() / local.z() + pose.cx, pose.fy * local.y() / local.z() + pose.cy);
  return true;
}

Mat3 look_at_rotation(const Vec3& position, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitY());
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return r;
}

}  // namespace aerial
