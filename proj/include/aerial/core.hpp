#pragma once

#include <string>

#include "aerial/types.hpp"

namespace aerial {

/// Pinhole camera with a camera-to-world rotation. The camera looks along +z
/// in its own frame; image x grows right and image y grows down.
struct CameraPose {
  std::string id;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();  ///< World position, meters.
  double time = 0.0;                ///< Capture time, seconds.
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
};

/// Spherical ground model. The outer sphere bounds the tallest structure.
struct SceneFrame {
  Vec3 earth_center = Vec3(0.0, 0.0, -1000.0);
  double earth_radius = 1000.0;
  double building_height = 0.0;
  double foreground_radius = 100.0;

  double outer_radius() const { return earth_radius + building_height; }

  /// Height of the Earth surface directly above/below the XY point, or the
  /// center height when the vertical line misses the sphere.
  double surface_z(const Vec2& xy) const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Vec3 at(double t) const { return origin + t * direction; }
};

/// Row-major RGB image with linear channels in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  ColorBatch pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(ColorBatch::Zero(Eigen::Index(w) * h, 3)) {}

  Eigen::Index index(int x, int y) const { return Eigen::Index(y) * width + x; }
  auto pixel(int x, int y) { return pixels.row(index(x, y)); }
  auto pixel(int x, int y) const { return pixels.row(index(x, y)); }
};

bool is_rotation(const Mat3& r, double tolerance = 1e-6);

/// Throws DataError naming the violated invariant.
void validate(const CameraPose& pose);
void validate(const SceneFrame& frame);

/// World-frame viewing direction R * (0, 0, 1). Translation is not applied.
Vec3 camera_direction_world(const CameraPose& pose);

/// Ray through continuous pixel coordinates (px, py); pixel (i, j) has its
/// center at (i + 0.5, j + 0.5). Throws std::out_of_range outside the image.
Ray pixel_ray(const CameraPose& pose, double px, double py);

/// Projects a world point through the pinhole model. Returns false for
/// points at or behind the camera plane.
bool project_point(const CameraPose& pose, const Vec3& world, Vec2& pixel);

/// Camera-to-world rotation looking from `position` toward `target`, with
/// image-up as close to `up` as possible.
Mat3 look_at_rotation(const Vec3& position, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace aerial
