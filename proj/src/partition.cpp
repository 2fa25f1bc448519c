#include "aerial/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace aerial {
namespace {

std::vector<Vec2> xy_positions(std::span<const CameraPose> cameras) {
  std::vector<Vec2> pts;
  pts.reserve(cameras.size());
  for (const auto& c : cameras) pts.emplace_back(c.translation.x(), c.translation.y());
  return pts;
}

int nearest_centroid(const Vec2& p, std::span<const Vec2> centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const double d = (p - centroids[i]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<Vec2> kmeanspp_init(std::span<const Vec2> pts, int k, Rng& rng) {
  const std::size_t n = pts.size();
  std::vector<Vec2> centers;
  centers.push_back(pts[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (pts[i] - centers[0]).squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.below(n);
    } else {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding at the tail: last positive-weight point
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    }
    centers.push_back(pts[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (pts[i] - pts[pick]).squaredNorm());
  }
  return centers;
}

void check_params(const PartitionParams& p) {
  if (p.n_regions < 1) throw std::invalid_argument("n_regions must be >= 1");
  if (p.n_p < 0) throw std::invalid_argument("n_p must be >= 0");
  if (!(p.time_scale > 0.0) || !(p.translation_scale > 0.0))
    throw std::invalid_argument("similarity scales must be positive");
  if (p.alpha && !(*p.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (p.kmeans_max_iters < 1) throw std::invalid_argument("kmeans_max_iters must be >= 1");
}

}  // namespace

KMeansResult kmeans_xy(std::span<const CameraPose> cameras, const PartitionParams& params) {
  check_params(params);
  const int k = params.n_regions;
  if (cameras.size() < static_cast<std::size_t>(k))
    throw DataError("k-means: " + std::to_string(cameras.size()) + " cameras for " + std::to_string(k) +
                    " regions");
  const auto pts = xy_positions(cameras);
  const std::size_t n = pts.size();

  Rng rng(derive_seed(params.seed, 0x6b6d65616e73ull));
  std::vector<Vec2> centroids = kmeanspp_init(pts, k, rng);
  std::vector<int> labels(n, -1);

  KMeansResult result;
  for (int iter = 0; iter < params.kmeans_max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = nearest_centroid(pts[i], centroids);
      changed |= (l != labels[i]);
      labels[i] = l;
    }
    result.iterations = iter + 1;
    if (!changed) break;

    std::vector<Vec2> sums(k, Vec2::Zero());
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[labels[i]] += pts[i];
      ++counts[labels[i]];
    }
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centroids[c] = sums[c] / counts[c];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Empty cluster: move it to the point farthest from its own centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double d = (pts[i] - centroids[labels[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = true;
      centroids[c] = pts[far];
    }
  }

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (centroids[a].x() != centroids[b].x()) return centroids[a].x() < centroids[b].x();
    if (centroids[a].y() != centroids[b].y()) return centroids[a].y() < centroids[b].y();
    return a < b;
  });
  std::vector<int> rank(k);
  for (int r = 0; r < k; ++r) rank[order[r]] = r;
  result.centroids.resize(k);
  for (int r = 0; r < k; ++r) result.centroids[r] = centroids[order[r]];
  result.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = rank[labels[i]];
  return result;
}

std::vector<std::vector<std::size_t>> boundary_camera_indices(std::span<const CameraPose> cameras,
                                                              std::span<const int> labels,
                                                              int n_regions, double alpha) {
  if (labels.size() != cameras.size()) throw std::invalid_argument("labels/cameras size mismatch");
  std::vector<std::set<std::size_t>> sets(n_regions);
  for (std::size_t a = 0; a < cameras.size(); ++a) {
    for (std::size_t b = a + 1; b < cameras.size(); ++b) {
      if (labels[a] == labels[b]) continue;
      if ((cameras[a].translation - cameras[b].translation).norm() < alpha) {
        sets[labels[a]].insert(b);
        sets[labels[b]].insert(a);
      }
    }
  }
  std::vector<std::vector<std::size_t>> out(n_regions);
  for (int r = 0; r < n_regions; ++r) out[r].assign(sets[r].begin(), sets[r].end());
  return out;
}

std::map<int, std::set<std::string>> boundary_cameras(std::span<const CameraPose> cameras,
                                                      std::span<const int> labels,
                                                      const PartitionParams& params) {
  if (!params.alpha) throw std::invalid_argument("boundary_cameras needs a resolved alpha");
  const auto idx = boundary_camera_indices(cameras, labels, params.n_regions, *params.alpha);
  std::map<int, std::set<std::string>> out;
  for (int r = 0; r < params.n_regions; ++r) {
    auto& s = out[r];
    for (auto i : idx[r]) s.insert(cameras[i].id);
  }
  return out;
}

bool visibility_test(const CameraPose& camera, const Vec2& centroid, double ground_z) {
  const Vec3 a = Vec3(centroid.x(), centroid.y(), ground_z) - camera.translation;
  if (a.squaredNorm() == 0.0) return true;
  return camera_direction_world(camera).dot(a) > 0.0;
}

double similarity_error(const CameraPose& a, const CameraPose& b, double translation_scale,
                        double time_scale, bool include_time) {
  double sq = (a.rotation - b.rotation).squaredNorm();
  sq += translation_scale * translation_scale * (a.translation - b.translation).squaredNorm();
  if (include_time) {
    const double dt = time_scale * (a.time - b.time);
    sq += dt * dt;
  }
  return std::sqrt(sq);
}

double default_alpha(std::span<const Vec2> centroids) {
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i)
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      sum += (centroids[i] - centroids[j]).norm();
      ++pairs;
    }
  if (pairs == 0 || !(sum > 0.0)) return 1.0;
  return 0.15 * sum / pairs;
}

RegionSet build_regions(std::span<const CameraPose> cameras, const PartitionParams& params,
                        const SceneFrame& scene) {
  const KMeansResult km = kmeans_xy(cameras, params);
  const int k = params.n_regions;
  const std::size_t n = cameras.size();

  RegionSet out;
  out.centroids = km.centroids;
  out.params = params;
  out.params.alpha = params.alpha.value_or(default_alpha(km.centroids));
  const double alpha = *out.params.alpha;

  const auto flagged = boundary_camera_indices(cameras, km.labels, k, alpha);

  std::vector<std::vector<bool>> member(k, std::vector<bool>(n, false));
  for (std::size_t c = 0; c < n; ++c) member[km.labels[c]][c] = true;

  std::vector<std::pair<double, std::size_t>> ranked;
  for (int r = 0; r < k; ++r) {
    const double ground_z = scene.surface_z(out.centroids[r]);
    std::vector<std::size_t> admitted;
    for (auto b : flagged[r])
      if (visibility_test(cameras[b], out.centroids[r], ground_z)) admitted.push_back(b);
    for (auto b : admitted) member[r][b] = true;

    // Similarity expansion ranks against the region as it stands after
    // boundary admission, so the result does not depend on visiting order.
    const std::vector<bool> base = member[r];
    for (auto b : admitted) {
      ranked.clear();
      for (std::size_t c = 0; c < n; ++c) {
        if (base[c]) continue;
        ranked.emplace_back(similarity_error(cameras[b], cameras[c], params.translation_scale,
                                             params.time_scale),
                            c);
      }
      const std::size_t take = std::min<std::size_t>(params.n_p, ranked.size());
      std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end());
      for (std::size_t i = 0; i < take; ++i) member[r][ranked[i].second] = true;
    }
  }

  for (int r = 0; r < k; ++r) {
    const auto count = std::count(member[r].begin(), member[r].end(), true);
    if (count < params.min_cameras)
      throw DataError("region " + std::to_string(r) + " has " + std::to_string(count) +
                      " cameras, fewer than min_cameras = " + std::to_string(params.min_cameras));
  }

  for (std::size_t c = 0; c < n; ++c) {
    const auto& id = cameras[c].id;
    if (out.assignments.count(id)) throw DataError("duplicate camera id '" + id + "'");
    auto& regions = out.assignments[id];
    for (int r = 0; r < k; ++r)
      if (member[r][c]) regions.insert(r);
    out.home[id] = km.labels[c];
  }
  for (int r = 0; r < k; ++r) {
    auto& s = out.boundary[r];
    for (auto b : flagged[r]) s.insert(cameras[b].id);
  }
  return out;
}

std::vector<std::size_t> region_members(const RegionSet& regions, std::span<const CameraPose> cameras,
                                        int region) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const auto it = regions.assignments.find(cameras[c].id);
    if (it != regions.assignments.end() && it->second.count(region)) out.push_back(c);
  }
  return out;
}

}  // namespace aerial
