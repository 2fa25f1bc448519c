#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aerial/core.hpp"

namespace aerial {

enum class SampleMode { bounded, unbounded, inside_shell };

const char* to_string(SampleMode mode);

struct SamplingParams {
  int n_coarse = 64;
  int n_fine = 128;
  bool jitter = false;
  std::uint64_t seed = 0;
};

/// Sampling interval of one ray before any samples are placed.
struct RayRange {
  SampleMode mode = SampleMode::unbounded;
  double near = 0.0;
  double far = 0.0;
};

/// Per-ray sampling plan. `t` is the merged ascending list the renderer
/// integrates over and `deltas[i]` the segment owned by `t[i]`.
struct SampleSpec {
  SampleMode mode = SampleMode::unbounded;
  double near = 0.0;
  double far = 0.0;
  double foreground_radius = 0.0;
  std::vector<double> coarse_t;
  std::vector<double> fine_t;
  std::vector<double> t;
  std::vector<double> deltas;
  /// Coarse bin edges in the sampling coordinate: t for bounded rays, the
  /// contracted coordinate for unbounded ones.
  std::vector<double> coarse_edges;
};

/// Last-segment length for rays that run to infinity.
inline constexpr double kUnboundedTailDelta = 1e10;
/// Start of the foreground interval for unbounded rays, meters.
inline constexpr double kUnboundedEpsilon = 1e-3;

/// Real roots of |o + t d - c|^2 = r^2 in ascending order. Tangent rays
/// (discriminant within 1e-9 of zero, relative) count as misses.
template <typename Scalar>
std::optional<std::pair<Scalar, Scalar>> ray_sphere_roots(const Eigen::Matrix<Scalar, 3, 1>& origin,
                                                          const Eigen::Matrix<Scalar, 3, 1>& direction,
                                                          const Eigen::Matrix<Scalar, 3, 1>& center,
                                                          Scalar radius) {
  using std::sqrt;
  const Eigen::Matrix<Scalar, 3, 1> oc = origin - center;
  const Scalar a = direction.squaredNorm();
  const Scalar b = Scalar(2) * direction.dot(oc);
  const Scalar dist = oc.norm();
  // (|oc| - r)(|oc| + r) keeps C accurate when the ray starts near a large sphere.
  const Scalar c = (dist - radius) * (dist + radius);
  const Scalar disc = b * b - Scalar(4) * a * c;
  if (!(disc > Scalar(0)) || disc <= Scalar(1e-9) * b * b) return std::nullopt;
  const Scalar root = sqrt(disc);
  const Scalar q = Scalar(-0.5) * (b + (b < Scalar(0) ? -root : root));
  Scalar t0 = q / a;
  Scalar t1 = c / q;
  if (t1 < t0) std::swap(t0, t1);
  return std::make_pair(t0, t1);
}

inline std::optional<std::pair<double, double>> ray_sphere_roots(const Ray& ray, const Vec3& center,
                                                                 double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  return ray_sphere_roots<double>(ray.origin, ray.direction, center, radius);
}

/// near on the outer sphere, far on the Earth (or the outer-sphere exit for
/// grazing rays). Throws DataError for cameras below the Earth surface.
RayRange bounded_range(const Ray& ray, const SceneFrame& scene);

/// Stratified samples, one per equal-width bin: bin centers, or uniform in
/// the bin when jitter is on.
std::vector<double> coarse_samples(double near, double far, const SamplingParams& params, Rng& rng);

/// Piecewise-constant inverse-CDF samples over bins [edges[i], edges[i+1])
/// with probability proportional to weights[i]. All-zero weights fall back to
/// uniform; negative weights throw. Output is ascending.
std::vector<double> fine_samples_in_bins(std::span<const double> edges, std::span<const double> weights,
                                         int n_fine, bool jitter, Rng& rng);

/// Bins around each coarse sample: midpoints inside, half-gap extrapolation
/// at the ends.
std::vector<double> bin_edges_around(std::span<const double> coarse_t);

/// Jittered stratified inverse-CDF draws with bins around `coarse_t`.
std::vector<double> fine_samples(std::span<const double> coarse_t, std::span<const double> weights,
                                 int n_fine, std::uint64_t seed);

template <typename Scalar>
Scalar contract(Scalar t, Scalar r1) {
  if (t <= r1) return t;
  return r1 + Scalar(1) / r1 - Scalar(1) / t;
}

/// Inverse of contract on [0, r1 + 1/r1). Throws std::domain_error at or
/// beyond the asymptote.
template <typename Scalar>
Scalar uncontract(Scalar s, Scalar r1) {
  if (s <= r1) return s;
  // (r1 - s) is exact for s within a factor of two of r1.
  const Scalar gap = (r1 - s) + Scalar(1) / r1;
  if (!(gap > Scalar(0))) throw std::domain_error("uncontract: s at or beyond r1 + 1/r1");
  return Scalar(1) / gap;
}

/// Coarse plan for a ray that misses the scene: half the samples uniform in
/// [eps, R1], half uniform in the contracted background.
SampleSpec unbounded_samples(const Ray& ray, const SceneFrame& scene, const SamplingParams& params,
                             Rng& rng);

/// Coarse-only plan for any ray; `t`/`deltas` hold the coarse samples.
SampleSpec plan_coarse(const Ray& ray, const SceneFrame& scene, const SamplingParams& params, Rng& rng);

/// Adds params.n_fine samples drawn from the coarse weights and rebuilds the
/// merged `t`/`deltas`.
void add_fine(SampleSpec& spec, std::span<const double> coarse_weights, const SamplingParams& params,
              Rng& rng);

/// Recomputes `deltas` for the current `t`.
void compute_deltas(SampleSpec& spec);

}  // namespace aerial
