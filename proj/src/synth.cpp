#include "aerial/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aerial {
namespace {

constexpr int kPlacementAttempts = 10000;
constexpr double kBuildingGap = 4.0;

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Vec2 point_in_disc(Rng& rng, const Vec2& center, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double a = 2.0 * std::numbers::pi * rng.uniform();
  return center + r * Vec2(std::cos(a), std::sin(a));
}

bool overlaps(const Box& a, const Box& b, double gap) {
  return a.min.x() < b.max.x() + gap && b.min.x() < a.max.x() + gap && a.min.y() < b.max.y() + gap &&
         b.min.y() < a.max.y() + gap;
}

void check_spec(const SceneSpec& s) {
  if (!(s.earth_radius > 0.0)) throw DataError("scene: earth_radius must be positive");
  if (s.n_buildings < 0) throw DataError("scene: n_buildings must be >= 0");
  if (!(s.height_min > 0.0) || s.height_max < s.height_min) throw DataError("scene: invalid height range");
  if (!(s.footprint_min > 0.0) || s.footprint_max < s.footprint_min) throw DataError("scene: invalid footprint range");
  if (!(s.ground_thickness > 0.0)) throw DataError("scene: ground_thickness must be positive");
  if (!(s.density > 0.0)) throw DataError("scene: density must be positive");
  if (s.palette.empty()) throw DataError("scene: palette is empty");
  if (s.n_clusters < 0) throw DataError("scene: n_clusters must be >= 0");
  if (!s.cluster_sizes.empty()) {
    if (static_cast<int>(s.cluster_sizes.size()) != s.n_clusters)
      throw DataError("scene: cluster_sizes needs one entry per cluster");
    int total = 0;
    for (int c : s.cluster_sizes) {
      if (c < 0) throw DataError("scene: negative cluster size");
      total += c;
    }
    if (total != s.n_buildings) throw DataError("scene: cluster_sizes must sum to n_buildings");
  }
}

CameraPose make_pose(int index, const Vec3& position, const Vec3& target, const TrajectorySpec& spec) {
  CameraPose p;
  char id[32];
  std::snprintf(id, sizeof id, "cam_%04d", index);
  p.id = id;
  p.rotation = look_at_rotation(position, target);
  p.translation = position;
  p.time = index * spec.dwell;
  p.width = spec.image_width;
  p.height = spec.image_height;
  const double half = std::tan(0.5 * spec.fov_deg * std::numbers::pi / 180.0);
  p.fx = p.fy = 0.5 * spec.image_width / half;
  p.cx = 0.5 * spec.image_width;
  p.cy = 0.5 * spec.image_height;
  return p;
}

}  // namespace

SceneField::SceneField(std::vector<Box> boxes, const Vec3& earth_center, double earth_radius,
                       double ground_thickness, const Vec3& ground_albedo, double density)
    : boxes_(std::move(boxes)),
      earth_center_(earth_center),
      ground_top_(earth_radius + ground_thickness),
      ground_albedo_(ground_albedo),
      density_(density) {}

FieldSample SceneField::query(const Vec3& position, const Vec3&) const {
  for (const Box& b : boxes_)
    if (b.contains(position)) return {b.albedo, density_};
  if ((position - earth_center_).norm() <= ground_top_) return {ground_albedo_, density_};
  return {};
}

SyntheticScene build_scene(const SceneSpec& spec) {
  check_spec(spec);
  SceneFrame frame;
  frame.earth_radius = spec.earth_radius;
  frame.earth_center = Vec3(0.0, 0.0, -spec.earth_radius);

  Rng rng(derive_seed(spec.seed, 0));
  std::vector<Vec2> centers;
  for (int c = 0; c < spec.n_clusters; ++c) {
    const double a = 2.0 * std::numbers::pi * c / spec.n_clusters;
    const double r = spec.n_clusters > 1 ? 0.5 * spec.cluster_separation : 0.0;
    centers.emplace_back(r * std::cos(a), r * std::sin(a));
  }

  std::vector<int> cluster_of(spec.n_buildings, 0);
  if (!spec.cluster_sizes.empty()) {
    int b = 0;
    for (int c = 0; c < spec.n_clusters; ++c)
      for (int k = 0; k < spec.cluster_sizes[c]; ++k) cluster_of[b++] = c;
  } else if (spec.n_clusters > 0) {
    for (int b = 0; b < spec.n_buildings; ++b) cluster_of[b] = b % spec.n_clusters;
  }

  std::vector<Box> boxes;
  double top = spec.ground_thickness;
  for (int b = 0; b < spec.n_buildings; ++b) {
    const double sx = uniform_in(rng, spec.footprint_min, spec.footprint_max);
    const double sy = uniform_in(rng, spec.footprint_min, spec.footprint_max);
    const double h = uniform_in(rng, spec.height_min, spec.height_max);
    Box box;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const Vec2 c = spec.n_clusters > 0 ? point_in_disc(rng, centers[cluster_of[b]], spec.cluster_radius)
                                         : point_in_disc(rng, Vec2::Zero(), spec.patch_radius);
      box.min.head<2>() = c - 0.5 * Vec2(sx, sy);
      box.max.head<2>() = c + 0.5 * Vec2(sx, sy);
      placed = true;
      for (const Box& other : boxes)
        if (overlaps(box, other, kBuildingGap)) {
          placed = false;
          break;
        }
    }
    if (!placed) throw DataError("scene: could not place building " + std::to_string(b) + " without overlap");

    // Base sits below the lowest footprint corner so the box meets the curved ground.
    double lowest = std::numeric_limits<double>::infinity();
    for (double x : {box.min.x(), box.max.x()})
      for (double y : {box.min.y(), box.max.y()}) lowest = std::min(lowest, frame.surface_z(Vec2(x, y)));
    box.min.z() = lowest - spec.ground_thickness;
    box.max.z() = frame.surface_z(box.center_xy()) + h;
    box.albedo = spec.palette[b % spec.palette.size()];
    box.cluster = cluster_of[b];
    for (double x : {box.min.x(), box.max.x()})
      for (double y : {box.min.y(), box.max.y()})
        top = std::max(top, (Vec3(x, y, box.max.z()) - frame.earth_center).norm() - spec.earth_radius);
    boxes.push_back(box);
  }
  frame.building_height = top;

  SceneField field(boxes, frame.earth_center, spec.earth_radius, spec.ground_thickness, spec.ground_albedo,
                   spec.density);
  return SyntheticScene{spec, frame, std::move(boxes), std::move(centers), std::move(field)};
}

TrajectoryKind parse_trajectory_kind(const std::string& name) {
  if (name == "uniform_grid") return TrajectoryKind::uniform_grid;
  if (name == "orbit_multi_altitude") return TrajectoryKind::orbit_multi_altitude;
  if (name == "uneven_per_building") return TrajectoryKind::uneven_per_building;
  throw DataError("unknown trajectory kind '" + name + "'");
}

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::uniform_grid: return "uniform_grid";
    case TrajectoryKind::orbit_multi_altitude: return "orbit_multi_altitude";
    case TrajectoryKind::uneven_per_building: return "uneven_per_building";
  }
  return "unknown";
}

std::vector<CameraPose> generate_trajectory(const TrajectorySpec& spec, const SyntheticScene& scene) {
  if (spec.n_cameras < 4) throw DataError("trajectory: n_cameras must be >= 4");
  if (spec.image_width < 1 || spec.image_height < 1) throw DataError("trajectory: invalid image size");
  if (!(spec.fov_deg > 0.0 && spec.fov_deg < 180.0)) throw DataError("trajectory: fov_deg must be in (0, 180)");
  if (!(spec.dwell > 0.0)) throw DataError("trajectory: dwell must be positive");
  const SceneFrame& frame = scene.frame;
  const double tallest = frame.building_height;
  std::vector<CameraPose> poses;
  poses.reserve(spec.n_cameras);

  switch (spec.kind) {
    case TrajectoryKind::uniform_grid: {
      if (!(spec.altitude > tallest)) throw DataError("trajectory: altitude must exceed the tallest building");
      const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.n_cameras))));
      const double step = side > 1 ? spec.grid_extent / (side - 1) : 0.0;
      const double pitch = spec.pitch_deg * std::numbers::pi / 180.0;
      for (int i = 0; i < spec.n_cameras; ++i) {
        const int row = i / side;
        const int k = i % side;
        const int col = row % 2 == 0 ? k : side - 1 - k;
        const Vec2 xy(-0.5 * spec.grid_extent + col * step, -0.5 * spec.grid_extent + row * step);
        const Vec3 pos(xy.x(), xy.y(), frame.surface_z(xy) + spec.altitude);
        Vec2 heading = -xy;
        heading = heading.norm() > 1e-9 ? heading.normalized() : Vec2::UnitX();
        const Vec3 forward(std::cos(pitch) * heading.x(), std::cos(pitch) * heading.y(), -std::sin(pitch));
        poses.push_back(make_pose(i, pos, pos + forward, spec));
      }
      break;
    }
    case TrajectoryKind::orbit_multi_altitude: {
      if (spec.orbit_rings < 1) throw DataError("trajectory: orbit_rings must be >= 1");
      if (!(spec.orbit_radius > 0.0)) throw DataError("trajectory: orbit_radius must be positive");
      const Vec3 target(spec.landmark.x(), spec.landmark.y(), frame.surface_z(spec.landmark));
      int index = 0;
      for (int ring = 0; ring < spec.orbit_rings; ++ring) {
        const int count = spec.n_cameras / spec.orbit_rings + (ring < spec.n_cameras % spec.orbit_rings ? 1 : 0);
        const double radius = spec.orbit_radius + ring * spec.orbit_radius_step;
        const double height = spec.altitude + ring * spec.orbit_altitude_step;
        const double phase = ring * std::numbers::pi / std::max(count, 1);
        for (int j = 0; j < count; ++j) {
          const double a = phase + 2.0 * std::numbers::pi * j / count;
          const Vec2 xy = spec.landmark + radius * Vec2(std::cos(a), std::sin(a));
          const Vec3 pos(xy.x(), xy.y(), target.z() + height);
          poses.push_back(make_pose(index++, pos, target, spec));
        }
      }
      break;
    }
    case TrajectoryKind::uneven_per_building: {
      const auto& boxes = scene.buildings;
      if (boxes.empty()) throw DataError("trajectory: uneven_per_building needs at least one building");
      if (!(spec.building_clearance > 0.0)) throw DataError("trajectory: building_clearance must be positive");
      Rng rng(derive_seed(spec.seed, 1));
      const int nb = static_cast<int>(boxes.size());
      int index = 0;
      for (int b = 0; b < nb; ++b) {
        const int count = spec.n_cameras / nb + (b < spec.n_cameras % nb ? 1 : 0);
        const Vec2 c = boxes[b].center_xy();
        const Vec3 target(c.x(), c.y(), 0.5 * (frame.surface_z(c) + boxes[b].max.z()));
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        for (int j = 0; j < count; ++j) {
          const double a = phase + 2.0 * std::numbers::pi * j / count;
          const Vec2 xy = c + spec.building_orbit_radius * Vec2(std::cos(a), std::sin(a));
          const Vec3 pos(xy.x(), xy.y(), frame.surface_z(xy) + tallest + spec.building_clearance);
          poses.push_back(make_pose(index++, pos, target, spec));
        }
      }
      break;
    }
  }

  for (const auto& p : poses) {
    for (const Box& b : scene.buildings)
      if (b.contains(p.translation)) throw DataError("trajectory: camera '" + p.id + "' is inside a building");
    if ((p.translation - frame.earth_center).norm() <= frame.earth_radius + scene.spec.ground_thickness)
      throw DataError("trajectory: camera '" + p.id + "' is inside the ground layer");
  }
  return poses;
}

double camera_cloud_radius(std::span<const CameraPose> cameras) {
  if (cameras.empty()) return 0.0;
  Vec3 mean = Vec3::Zero();
  for (const auto& c : cameras) mean += c.translation;
  mean /= static_cast<double>(cameras.size());
  double r = 0.0;
  for (const auto& c : cameras) r = std::max(r, (c.translation - mean).norm());
  return r;
}

std::vector<Image> render_ground_truth(std::span<const CameraPose> cameras, const SyntheticScene& scene,
                                       const RenderParams& params) {
  std::vector<Image> images(cameras.size());
  RenderParams per_view = params;
  per_view.threads = 1;
  parallel_for(cameras.size(), params.threads, [&](std::size_t i) {
    images[i] = render_view(cameras[i], scene.field, scene.frame, per_view).image;
  });
  return images;
}

}  // namespace aerial
