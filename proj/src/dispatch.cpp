#include "aerial/dispatch.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace aerial {

std::map<int, double> score_regions(const CameraPose& viewpoint, const RegionSet& regions,
                                    std::span<const CameraPose> cameras, const DispatchParams& params) {
  if (params.n_s < 1) throw std::invalid_argument("n_s must be >= 1");
  const double st = regions.params.translation_scale;
  const double stime = regions.params.time_scale;

  std::vector<std::vector<double>> errors(regions.size());
  for (const auto& cam : cameras) {
    const auto it = regions.assignments.find(cam.id);
    if (it == regions.assignments.end()) continue;
    const double s = similarity_error(viewpoint, cam, st, stime, params.use_time);
    for (int r : it->second) errors.at(r).push_back(s);
  }

  std::map<int, double> scores;
  for (int r = 0; r < regions.size(); ++r) {
    auto& e = errors[r];
    if (e.empty()) throw DataError("region " + std::to_string(r) + " has no cameras");
    const std::size_t take = std::min<std::size_t>(params.n_s, e.size());
    std::partial_sort(e.begin(), e.begin() + take, e.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += e[i];
    scores[r] = sum / static_cast<double>(take);
  }
  return scores;
}

DispatchDecision select_regions(const std::map<int, double>& scores, const DispatchParams& params) {
  if (scores.empty()) throw std::invalid_argument("select_regions: no region scores");
  if (!(params.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  DispatchDecision d;
  d.region_scores = scores;
  d.time_ignored = !params.use_time;
  for (const auto& [r, s] : scores)
    if (s < params.gamma) d.selected.push_back(r);
  if (!d.selected.empty()) return d;

  if (params.fallback == Fallback::error)
    throw DataError("no region has similarity error below gamma = " + std::to_string(params.gamma));
  int best = scores.begin()->first;
  double best_s = std::numeric_limits<double>::infinity();
  for (const auto& [r, s] : scores)
    if (s < best_s) {
      best_s = s;
      best = r;
    }
  d.selected = {best};
  d.used_fallback = true;
  return d;
}

DispatchDecision dispatch(const CameraPose& viewpoint, const RegionSet& regions,
                          std::span<const CameraPose> cameras, const DispatchParams& params) {
  return select_regions(score_regions(viewpoint, regions, cameras, params), params);
}

double calibrate_gamma(const RegionSet& regions, std::span<const CameraPose> cameras, int n_s,
                       double factor) {
  DispatchParams p;
  p.n_s = n_s;
  std::vector<double> own;
  for (const auto& cam : cameras) {
    const auto it = regions.home.find(cam.id);
    if (it == regions.home.end()) continue;
    own.push_back(score_regions(cam, regions, cameras, p).at(it->second));
  }
  if (own.empty()) throw DataError("gamma calibration: no cameras with a home region");
  const auto mid = own.begin() + own.size() / 2;
  std::nth_element(own.begin(), mid, own.end());
  double median = *mid;
  if (own.size() % 2 == 0) median = 0.5 * (median + *std::max_element(own.begin(), mid));
  return std::max(factor * median, 1e-9);
}

Image fuse_images(std::span<const Image> images) {
  if (images.empty()) throw std::invalid_argument("fuse_images: no images");
  Image out = images.front();
  if (images.size() == 1) return out;
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (images[i].width != out.width || images[i].height != out.height)
      throw std::invalid_argument("fuse_images: size mismatch");
    out.pixels += images[i].pixels;
  }
  out.pixels /= static_cast<double>(images.size());
  return out;
}

}  // namespace aerial
