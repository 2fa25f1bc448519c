#pragma once

#include <span>
#include <string>
#include <vector>

#include "aerial/field.hpp"
#include "aerial/render.hpp"

namespace aerial {

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Vec3 albedo = Vec3::Constant(0.5);
  int cluster = 0;

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec2 center_xy() const { return {0.5 * (min.x() + max.x()), 0.5 * (min.y() + max.y())}; }
};

/// Small-planet scene: box buildings standing on a sphere whose top touches
/// the world origin.
struct SceneSpec {
  double earth_radius = 1000.0;
  int n_buildings = 6;
  double height_min = 10.0;
  double height_max = 30.0;
  double footprint_min = 15.0;
  double footprint_max = 30.0;
  std::vector<Vec3> palette = {{0.80, 0.45, 0.35}, {0.35, 0.55, 0.80}, {0.85, 0.80, 0.45}, {0.50, 0.75, 0.45}};
  Vec3 ground_albedo = Vec3(0.55, 0.55, 0.50);
  double ground_thickness = 3.0;
  double density = 5.0;
  /// 0 spreads buildings over the disc of `patch_radius`; otherwise buildings
  /// are grouped into clusters on a circle of diameter `cluster_separation`.
  int n_clusters = 0;
  std::vector<int> cluster_sizes;  ///< Buildings per cluster; empty = round-robin.
  double patch_radius = 100.0;
  double cluster_separation = 200.0;
  double cluster_radius = 30.0;
  std::uint64_t seed = 1;
};

/// Analytic ground-truth field: constant density inside boxes and below the
/// top of the ground layer, albedo of the containing solid, empty elsewhere.
class SceneField final : public RadianceField {
 public:
  SceneField(std::vector<Box> boxes, const Vec3& earth_center, double earth_radius, double ground_thickness,
             const Vec3& ground_albedo, double density);
  FieldSample query(const Vec3& position, const Vec3& direction) const override;
  const std::vector<Box>& boxes() const { return boxes_; }

 private:
  std::vector<Box> boxes_;
  Vec3 earth_center_;
  double ground_top_;
  Vec3 ground_albedo_;
  double density_;
};

struct SyntheticScene {
  SceneSpec spec;
  SceneFrame frame;
  std::vector<Box> buildings;
  std::vector<Vec2> cluster_centers;
  SceneField field;
};

SyntheticScene build_scene(const SceneSpec& spec);

enum class TrajectoryKind { uniform_grid, orbit_multi_altitude, uneven_per_building };

TrajectoryKind parse_trajectory_kind(const std::string& name);
const char* to_string(TrajectoryKind kind);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::uniform_grid;
  int n_cameras = 16;
  int image_width = 64;
  int image_height = 64;
  double fov_deg = 50.0;
  /// Height above the ground for uniform_grid, and the first ring of
  /// orbit_multi_altitude.
  double altitude = 120.0;
  double grid_extent = 200.0;
  double pitch_deg = 45.0;
  Vec2 landmark = Vec2::Zero();
  int orbit_rings = 3;
  double orbit_radius = 80.0;
  double orbit_radius_step = 40.0;
  double orbit_altitude_step = 30.0;
  /// uneven_per_building: circle radius around each building and clearance
  /// above the tallest building.
  double building_orbit_radius = 40.0;
  double building_clearance = 40.0;
  double dwell = 2.0;
  std::uint64_t seed = 1;
};

/// Poses with ids "cam_0000"... and times index x dwell.
std::vector<CameraPose> generate_trajectory(const TrajectorySpec& spec, const SyntheticScene& scene);

/// Camera-cloud radius: largest distance from the mean camera position.
double camera_cloud_radius(std::span<const CameraPose> cameras);

/// Renders each camera against the scene's analytic field.
std::vector<Image> render_ground_truth(std::span<const CameraPose> cameras, const SyntheticScene& scene,
                                       const RenderParams& params);

}  // namespace aerial
