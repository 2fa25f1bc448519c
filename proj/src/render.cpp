#include "aerial/render.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aerial {
namespace {

/// Composites `samples` and writes per-sample weights. Returns opacity.
double composite(std::span<const double> deltas, std::span<const FieldSample> samples, double* weights,
                 Vec3& color) {
  color.setZero();
  double optical_depth = 0.0;
  double opacity = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double sigma = samples[i].density;
    if (!(sigma >= 0.0))
      throw NumericalError("invalid density " + std::to_string(sigma) + " at sample " + std::to_string(i));
    const double tau = sigma * deltas[i];
    const double w = std::exp(-optical_depth) * -std::expm1(-tau);
    if (weights) weights[i] = w;
    color += w * samples[i].color;
    opacity += w;
    optical_depth += tau;
  }
  return opacity;
}

struct Traced {
  Vec3 color;
  double opacity;
};

struct Scratch {
  std::vector<FieldSample> coarse;
  std::vector<FieldSample> merged;
  std::vector<double> weights;
};

template <typename Query>
Traced trace_ray(const Ray& ray, std::uint64_t ray_seed, const SceneFrame& scene, const SamplingParams& sp,
                 Scratch& s, Query&& query) {
  Rng rng(ray_seed);
  SampleSpec spec = plan_coarse(ray, scene, sp, rng);
  const std::size_t nc = spec.coarse_t.size();
  s.coarse.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) s.coarse[i] = query(ray.at(spec.coarse_t[i]), ray.direction);

  Traced out{};
  if (sp.n_fine <= 0) {
    out.opacity = composite(spec.deltas, s.coarse, nullptr, out.color);
    return out;
  }
  s.weights.resize(nc);
  Vec3 unused;
  composite(spec.deltas, s.coarse, s.weights.data(), unused);
  add_fine(spec, s.weights, sp, rng);

  s.merged.resize(spec.t.size());
  std::size_t c = 0;
  for (std::size_t i = 0; i < spec.t.size(); ++i) {
    while (c < nc && spec.coarse_t[c] < spec.t[i]) ++c;
    if (c < nc && spec.coarse_t[c] == spec.t[i])
      s.merged[i] = s.coarse[c];
    else
      s.merged[i] = query(ray.at(spec.t[i]), ray.direction);
  }
  out.opacity = composite(spec.deltas, s.merged, nullptr, out.color);
  return out;
}

/// Renders every pixel with `make_query(counter)` producing the per-point
/// query functor. Rows are the unit of parallel work.
template <typename MakeQuery>
RenderResult render_pixels(const CameraPose& pose, const SceneFrame& scene, const RenderParams& params,
                           MakeQuery&& make_query) {
  validate(pose);
  const auto start = std::chrono::steady_clock::now();
  RenderResult result;
  result.image = Image(pose.width, pose.height);
  result.transmittance.resize(Eigen::Index(pose.width) * pose.height);
  std::vector<std::uint64_t> row_queries(pose.height, 0);

  parallel_for(pose.height, params.threads, [&](std::size_t y) {
    Scratch scratch;
    std::uint64_t queries = 0;
    auto query = make_query(queries);
    for (int x = 0; x < pose.width; ++x) {
      const Eigen::Index idx = result.image.index(x, static_cast<int>(y));
      const Ray ray = pixel_ray(pose, x + 0.5, static_cast<double>(y) + 0.5);
      const Traced t =
          trace_ray(ray, derive_seed(params.sampling.seed, static_cast<std::uint64_t>(idx)), scene,
                    params.sampling, scratch, query);
      result.image.pixels.row(idx) = t.color.transpose();
      result.transmittance[idx] = 1.0 - t.opacity;
    }
    row_queries[y] = queries;
  });

  for (auto q : row_queries) result.timing.field_queries += q;
  result.timing.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

RayRadiance integrate_ray(std::span<const double> deltas, std::span<const FieldSample> samples) {
  if (deltas.size() != samples.size()) throw std::invalid_argument("integrate_ray: deltas/samples mismatch");
  RayRadiance r;
  r.weights.resize(samples.size());
  r.opacity = composite(deltas, samples, r.weights.data(), r.color);
  return r;
}

RayRadiance integrate_ray(const SampleSpec& spec, std::span<const FieldSample> samples) {
  return integrate_ray(spec.deltas, samples);
}

RenderResult render_view(const CameraPose& pose, const RadianceField& field, const SceneFrame& scene,
                         const RenderParams& params) {
  return render_pixels(pose, scene, params, [&field](std::uint64_t& counter) {
    return [&field, &counter](const Vec3& p, const Vec3& d) {
      ++counter;
      return field.query(p, d);
    };
  });
}

RenderResult render_image(const CameraPose& pose, const DispatchDecision& decision,
                          std::span<const RadianceField* const> fields, const SceneFrame& scene,
                          const RenderParams& params) {
  if (decision.selected.empty()) throw std::invalid_argument("render_image: no region selected");
  for (int r : decision.selected)
    if (r < 0 || static_cast<std::size_t>(r) >= fields.size() || fields[r] == nullptr)
      throw DataError("render_image: no field for region " + std::to_string(r));

  const auto start = std::chrono::steady_clock::now();
  std::vector<Image> images;
  RenderResult result;
  for (int r : decision.selected) {
    RenderResult part = render_view(pose, *fields[r], scene, params);
    result.timing.field_queries += part.timing.field_queries;
    if (images.empty())
      result.transmittance = part.transmittance;
    else
      result.transmittance += part.transmittance;
    images.push_back(std::move(part.image));
  }
  if (images.size() > 1) result.transmittance /= static_cast<double>(images.size());
  result.image = fuse_images(images);
  result.timing.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RenderResult render_fusion_baseline(const CameraPose& pose, std::span<const RadianceField* const> fields,
                                    const SceneFrame& scene, const RenderParams& params) {
  if (fields.empty()) throw std::invalid_argument("render_fusion_baseline: no fields");
  for (std::size_t r = 0; r < fields.size(); ++r)
    if (fields[r] == nullptr) throw DataError("render_fusion_baseline: no field for region " + std::to_string(r));
  if (fields.size() == 1) return render_view(pose, *fields[0], scene, params);

  const double inv = 1.0 / static_cast<double>(fields.size());
  return render_pixels(pose, scene, params, [&fields, inv](std::uint64_t& counter) {
    return [&fields, &counter, inv](const Vec3& p, const Vec3& d) {
      FieldSample mean;
      for (const RadianceField* f : fields) {
        const FieldSample s = f->query(p, d);
        mean.color += s.color;
        mean.density += s.density;
      }
      counter += fields.size();
      mean.color *= inv;
      mean.density *= inv;
      return mean;
    };
  });
}

}  // namespace aerial
