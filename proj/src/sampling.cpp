#include "aerial/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aerial {

namespace {

/// uncontract for points drawn inside the last background bin, whose upper
/// edge can round onto the asymptote.
double uncontract_background(double s, double r1) {
  while (!((r1 - s) + 1.0 / r1 > 0.0)) s = std::nextafter(s, 0.0);
  return uncontract(s, r1);
}

}  // namespace

const char* to_string(SampleMode mode) {
  switch (mode) {
    case SampleMode::bounded: return "bounded";
    case SampleMode::unbounded: return "unbounded";
    case SampleMode::inside_shell: return "inside_shell";
  }
  return "unknown";
}

RayRange bounded_range(const Ray& ray, const SceneFrame& scene) {
  const double dist = (ray.origin - scene.earth_center).norm();
  if (dist < scene.earth_radius * (1.0 - 1e-12))
    throw DataError("camera is below the Earth surface (distance " + std::to_string(dist) +
                    " < radius " + std::to_string(scene.earth_radius) + ")");
  const double outer_r = scene.outer_radius();
  const auto outer = ray_sphere_roots(ray, scene.earth_center, outer_r);
  const auto earth = ray_sphere_roots(ray, scene.earth_center, scene.earth_radius);

  RayRange range;
  if (dist <= outer_r) {
    range.mode = SampleMode::inside_shell;
    range.near = 0.0;
    if (earth && earth->first > 0.0)
      range.far = earth->first;
    else if (outer && outer->second > 0.0)
      range.far = outer->second;
    else
      range.far = 0.0;
  } else if (outer && outer->first > 0.0) {
    range.mode = SampleMode::bounded;
    range.near = outer->first;
    range.far = (earth && earth->first > 0.0) ? earth->first : outer->second;
  }
  if (range.mode != SampleMode::unbounded && !(range.far > range.near)) range = RayRange{};
  return range;
}

std::vector<double> coarse_samples(double near, double far, const SamplingParams& params, Rng& rng) {
  if (!(far > near)) throw std::invalid_argument("coarse_samples: need near < far");
  if (params.n_coarse < 1) throw std::invalid_argument("n_coarse must be >= 1");
  const int n = params.n_coarse;
  const double w = (far - near) / n;
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) {
    const double u = params.jitter ? rng.uniform() : 0.5;
    t[i] = std::min(near + (i + u) * w, far);
  }
  return t;
}

std::vector<double> fine_samples_in_bins(std::span<const double> edges, std::span<const double> weights,
                                         int n_fine, bool jitter, Rng& rng) {
  if (edges.size() != weights.size() + 1 || weights.empty())
    throw std::invalid_argument("fine_samples: need one more edge than weights");
  if (n_fine <= 0) return {};
  const std::size_t bins = weights.size();
  std::vector<double> cdf(bins + 1, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    if (!(weights[i] >= 0.0))
      throw std::invalid_argument("fine_samples: weight " + std::to_string(i) + " is negative or NaN");
    cdf[i + 1] = cdf[i] + weights[i];
  }
  if (!(cdf[bins] > 0.0)) {
    for (std::size_t i = 0; i <= bins; ++i) cdf[i] = static_cast<double>(i);
  }
  const double total = cdf[bins];
  for (auto& c : cdf) c /= total;
  cdf[bins] = 1.0;

  std::vector<double> out(n_fine);
  for (int k = 0; k < n_fine; ++k) {
    const double u = (k + (jitter ? rng.uniform() : 0.5)) / n_fine;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t b = static_cast<std::size_t>(it - cdf.begin());
    b = std::clamp<std::size_t>(b, 1, bins) - 1;
    const double span = cdf[b + 1] - cdf[b];
    const double local = span > 0.0 ? std::clamp((u - cdf[b]) / span, 0.0, 1.0) : 0.5;
    out[k] = edges[b] + local * (edges[b + 1] - edges[b]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> bin_edges_around(std::span<const double> coarse_t) {
  const std::size_t n = coarse_t.size();
  if (n < 2) throw std::invalid_argument("bin_edges_around: need at least two samples");
  std::vector<double> edges(n + 1);
  for (std::size_t i = 1; i < n; ++i) edges[i] = 0.5 * (coarse_t[i - 1] + coarse_t[i]);
  edges[0] = coarse_t[0] - 0.5 * (coarse_t[1] - coarse_t[0]);
  edges[n] = coarse_t[n - 1] + 0.5 * (coarse_t[n - 1] - coarse_t[n - 2]);
  return edges;
}

std::vector<double> fine_samples(std::span<const double> coarse_t, std::span<const double> weights,
                                 int n_fine, std::uint64_t seed) {
  if (coarse_t.size() != weights.size()) throw std::invalid_argument("fine_samples: length mismatch");
  Rng rng(seed);
  const auto edges = bin_edges_around(coarse_t);
  return fine_samples_in_bins(edges, weights, n_fine, true, rng);
}

SampleSpec unbounded_samples(const Ray& /*ray*/, const SceneFrame& scene, const SamplingParams& params,
                             Rng& rng) {
  const double r1 = scene.foreground_radius;
  if (!(r1 > kUnboundedEpsilon)) throw std::invalid_argument("foreground radius must exceed epsilon");
  if (params.n_coarse < 2) throw std::invalid_argument("n_coarse must be >= 2");
  const int n_fg = params.n_coarse / 2;
  const int n_bg = params.n_coarse - n_fg;

  SampleSpec spec;
  spec.mode = SampleMode::unbounded;
  spec.foreground_radius = r1;
  spec.near = kUnboundedEpsilon;
  spec.far = std::numeric_limits<double>::infinity();

  auto& edges = spec.coarse_edges;
  edges.reserve(params.n_coarse + 1);
  const double w_fg = (r1 - kUnboundedEpsilon) / n_fg;
  for (int i = 0; i < n_fg; ++i) edges.push_back(kUnboundedEpsilon + i * w_fg);
  const double w_bg = (1.0 / r1) / n_bg;
  for (int i = 0; i <= n_bg; ++i) edges.push_back(r1 + i * w_bg);

  spec.coarse_t.resize(params.n_coarse);
  for (int i = 0; i < params.n_coarse; ++i) {
    const double u = params.jitter ? rng.uniform() : 0.5;
    const double s = edges[i] + u * (edges[i + 1] - edges[i]);
    spec.coarse_t[i] = uncontract_background(s, r1);
  }
  spec.t = spec.coarse_t;
  compute_deltas(spec);
  return spec;
}

SampleSpec plan_coarse(const Ray& ray, const SceneFrame& scene, const SamplingParams& params, Rng& rng) {
  const RayRange range = bounded_range(ray, scene);
  if (range.mode == SampleMode::unbounded) return unbounded_samples(ray, scene, params, rng);
  SampleSpec spec;
  spec.mode = range.mode;
  spec.near = range.near;
  spec.far = range.far;
  spec.foreground_radius = scene.foreground_radius;
  spec.coarse_t = coarse_samples(range.near, range.far, params, rng);
  spec.coarse_edges.resize(params.n_coarse + 1);
  const double w = (range.far - range.near) / params.n_coarse;
  for (int i = 0; i <= params.n_coarse; ++i) spec.coarse_edges[i] = range.near + i * w;
  spec.coarse_edges.back() = range.far;
  spec.t = spec.coarse_t;
  compute_deltas(spec);
  return spec;
}

void add_fine(SampleSpec& spec, std::span<const double> coarse_weights, const SamplingParams& params,
              Rng& rng) {
  if (coarse_weights.size() != spec.coarse_t.size())
    throw std::invalid_argument("add_fine: one weight per coarse sample required");
  spec.fine_t = fine_samples_in_bins(spec.coarse_edges, coarse_weights, params.n_fine, params.jitter, rng);
  if (spec.mode == SampleMode::unbounded)
    for (auto& s : spec.fine_t) s = uncontract_background(s, spec.foreground_radius);

  std::vector<double> merged(spec.coarse_t.size() + spec.fine_t.size());
  std::merge(spec.coarse_t.begin(), spec.coarse_t.end(), spec.fine_t.begin(), spec.fine_t.end(),
             merged.begin());
  spec.t.clear();
  spec.t.reserve(merged.size());
  for (double t : merged)
    if (spec.t.empty() || t > spec.t.back()) spec.t.push_back(t);
  compute_deltas(spec);
}

void compute_deltas(SampleSpec& spec) {
  const std::size_t n = spec.t.size();
  spec.deltas.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) spec.deltas[i] = spec.t[i + 1] - spec.t[i];
  if (n > 0)
    spec.deltas[n - 1] =
        spec.mode == SampleMode::unbounded ? kUnboundedTailDelta : std::max(spec.far - spec.t[n - 1], 0.0);
}

}  // namespace aerial
