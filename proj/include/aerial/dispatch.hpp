#pragma once

#include <map>
#include <span>
#include <vector>

#include "aerial/partition.hpp"

namespace aerial {

enum class Fallback { nearest_region, error };

struct DispatchParams {
  int n_s = 5;
  double gamma = 1.0;
  Fallback fallback = Fallback::nearest_region;
  /// False when the viewpoint has no capture time; the time row is then
  /// dropped from both operands of the similarity error.
  bool use_time = true;
};

struct DispatchDecision {
  std::map<int, double> region_scores;
  std::vector<int> selected;  ///< Ascending region indices, never empty.
  bool used_fallback = false;
  bool time_ignored = false;
};

/// Mean of the n_s smallest similarity errors between the viewpoint and each
/// region's cameras (all members when a region has fewer than n_s).
std::map<int, double> score_regions(const CameraPose& viewpoint, const RegionSet& regions,
                                    std::span<const CameraPose> cameras, const DispatchParams& params);

/// Regions with score < gamma; otherwise the argmin (or an error, per the
/// fallback policy).
DispatchDecision select_regions(const std::map<int, double>& scores, const DispatchParams& params);

DispatchDecision dispatch(const CameraPose& viewpoint, const RegionSet& regions,
                          std::span<const CameraPose> cameras, const DispatchParams& params);

/// factor x median over cameras of their own home-region score.
double calibrate_gamma(const RegionSet& regions, std::span<const CameraPose> cameras, int n_s,
                       double factor = 1.5);

/// Per-pixel arithmetic mean. A single image is returned unchanged.
Image fuse_images(std::span<const Image> images);

}  // namespace aerial
