#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aerial/core.hpp"

namespace aerial {

struct PartitionParams {
  int n_regions = 4;
  /// Boundary distance threshold in meters. Unset means 0.15 x the mean
  /// pairwise distance between k-means centroids.
  std::optional<double> alpha;
  int n_p = 4;
  double time_scale = 1.0;
  double translation_scale = 1.0;
  int kmeans_max_iters = 100;
  std::uint64_t seed = 0;
  int min_cameras = 5;
};

/// Camera-to-region assignment. A camera always keeps its home (k-means)
/// region and may also belong to neighbouring regions.
struct RegionSet {
  std::vector<Vec2> centroids;
  std::map<std::string, std::set<int>> assignments;
  std::map<std::string, int> home;
  /// Per region, out-of-region cameras flagged by the distance condition
  /// (before the visibility test).
  std::map<int, std::set<std::string>> boundary;
  PartitionParams params;  ///< alpha is always resolved here.
  double gamma_calibration = 0.0;

  int size() const { return static_cast<int>(centroids.size()); }
};

struct KMeansResult {
  std::vector<Vec2> centroids;  ///< Sorted lexicographically by (x, y).
  std::vector<int> labels;
  int iterations = 0;
};

/// Lloyd's algorithm on camera XY positions with seeded k-means++ start.
KMeansResult kmeans_xy(std::span<const CameraPose> cameras, const PartitionParams& params);

/// Cameras of other regions within alpha (3-D) of some member of region i,
/// returned as camera indices per region.
std::vector<std::vector<std::size_t>> boundary_camera_indices(std::span<const CameraPose> cameras,
                                                              std::span<const int> labels,
                                                              int n_regions, double alpha);

std::map<int, std::set<std::string>> boundary_cameras(std::span<const CameraPose> cameras,
                                                      std::span<const int> labels,
                                                      const PartitionParams& params);

/// cos(theta) > 0 between the camera's viewing direction and the vector to
/// the centroid lifted to `ground_z`.
bool visibility_test(const CameraPose& camera, const Vec2& centroid, double ground_z);

/// Frobenius distance between [[R, s_t t], [0, s_time time]] blocks.
double similarity_error(const CameraPose& a, const CameraPose& b, double translation_scale = 1.0,
                        double time_scale = 1.0, bool include_time = true);

double default_alpha(std::span<const Vec2> centroids);

RegionSet build_regions(std::span<const CameraPose> cameras, const PartitionParams& params,
                        const SceneFrame& scene);

/// Indices (in `cameras` order) of the cameras assigned to `region`.
std::vector<std::size_t> region_members(const RegionSet& regions, std::span<const CameraPose> cameras,
                                        int region);

}  // namespace aerial
