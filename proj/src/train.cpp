#include "aerial/train.hpp"
#include "aerial/render.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aerial {
namespace {

constexpr std::size_t kChunks = 8;

struct RayState {
  std::vector<std::optional<TrilinearStencil>> stencils;
  std::vector<FieldSample> samples;
  std::vector<double> weights;
  std::vector<double> depth_after;  ///< Optical depth through sample i inclusive.
  Vec3 color = Vec3::Zero();
};

void forward_ray(const VoxelGridField& field, const Ray& ray, const SampleSpec& plan, RayState& s) {
  const std::size_t n = plan.t.size();
  s.stencils.resize(n);
  s.samples.resize(n);
  s.weights.resize(n);
  s.depth_after.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.stencils[i] = field.stencil(ray.at(plan.t[i]));
    s.samples[i] = s.stencils[i] ? field.evaluate(*s.stencils[i]) : FieldSample{};
  }
  double depth = 0.0;
  s.color.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = s.samples[i].density;
    if (!(sigma >= 0.0))
      throw NumericalError("invalid density " + std::to_string(sigma) + " at sample " + std::to_string(i));
    const double tau = sigma * plan.deltas[i];
    s.weights[i] = std::exp(-depth) * -std::expm1(-tau);
    s.color += s.weights[i] * s.samples[i].color;
    depth += tau;
    s.depth_after[i] = depth;
  }
}

/// dL/dparams for one ray given dL/dcolor, added to `grad`.
void backward_ray(const VoxelGridField& field, const SampleSpec& plan, const RayState& s, const Vec3& g,
                  Eigen::Ref<Eigen::VectorXd> grad) {
  const std::size_t n = plan.t.size();
  double suffix = 0.0;  // sum_{j>i} w_j (g . c_j)
  std::vector<double> gc(n);
  for (std::size_t i = 0; i < n; ++i) gc[i] = g.dot(s.samples[i].color);
  for (std::size_t k = n; k-- > 0;) {
    const double t_next = std::exp(-s.depth_after[k]);
    if (s.stencils[k]) {
      FieldSampleGrad up;
      up.d_color = s.weights[k] * g;
      up.d_density = plan.deltas[k] * (t_next * gc[k] - suffix);
      field.accumulate_gradient(*s.stencils[k], up, grad);
    }
    suffix += s.weights[k] * gc[k];
  }
}

std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t chunk) {
  const std::size_t size = (n + kChunks - 1) / kChunks;
  const std::size_t begin = std::min(n, chunk * size);
  return {begin, std::min(n, begin + size)};
}

}  // namespace

double learning_rate(const TrainConfig& config, int iteration) {
  if (config.iterations <= 1) return config.lr_start;
  const double f = static_cast<double>(iteration) / (config.iterations - 1);
  return config.lr_start * std::pow(config.lr_end / config.lr_start, f);
}

RayBatch sample_ray_batch(std::span<const CameraPose> cameras, std::span<const Image> images, int count,
                          Rng& rng) {
  if (cameras.empty() || cameras.size() != images.size())
    throw std::invalid_argument("sample_ray_batch: need one image per camera");
  RayBatch b;
  b.rays.reserve(count);
  b.truth.resize(count, 3);
  for (int i = 0; i < count; ++i) {
    const std::size_t c = rng.below(cameras.size());
    const auto& pose = cameras[c];
    const int x = static_cast<int>(rng.below(pose.width));
    const int y = static_cast<int>(rng.below(pose.height));
    b.rays.push_back(pixel_ray(pose, x + 0.5, y + 0.5));
    b.truth.row(i) = images[c].pixel(x, y);
  }
  return b;
}

RayBatch full_image_batch(std::span<const CameraPose> cameras, std::span<const Image> images) {
  if (cameras.size() != images.size()) throw std::invalid_argument("full_image_batch: need one image per camera");
  Eigen::Index total = 0;
  for (const auto& im : images) total += im.pixels.rows();
  RayBatch b;
  b.rays.reserve(total);
  b.truth.resize(total, 3);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const auto& pose = cameras[c];
    if (images[c].width != pose.width || images[c].height != pose.height)
      throw DataError("image size does not match camera '" + pose.id + "'");
    for (int y = 0; y < pose.height; ++y)
      for (int x = 0; x < pose.width; ++x) {
        b.rays.push_back(pixel_ray(pose, x + 0.5, y + 0.5));
        b.truth.row(row++) = images[c].pixel(x, y);
      }
  }
  return b;
}

void plan_ray_batch(RayBatch& batch, const RadianceField& field, const SceneFrame& scene,
                    const SamplingParams& sampling, std::uint64_t seed, unsigned threads) {
  batch.plans.resize(batch.rays.size());
  parallel_for(batch.rays.size(), threads, [&](std::size_t i) {
    const Ray& ray = batch.rays[i];
    Rng rng(derive_seed(seed, i));
    SampleSpec spec = plan_coarse(ray, scene, sampling, rng);
    if (sampling.n_fine > 0) {
      std::vector<FieldSample> coarse(spec.coarse_t.size());
      for (std::size_t k = 0; k < coarse.size(); ++k) coarse[k] = field.query(ray.at(spec.coarse_t[k]), ray.direction);
      const RayRadiance r = integrate_ray(spec.deltas, coarse);
      add_fine(spec, r.weights, sampling, rng);
    }
    batch.plans[i] = std::move(spec);
  });
}

LossValue loss_and_gradient(const VoxelGridField& field, const RayBatch& batch, const LossParams& loss,
                            Eigen::VectorXd* grad, unsigned threads, ColorBatch* rendered_out) {
  const std::size_t n = batch.rays.size();
  if (batch.plans.size() != n || static_cast<std::size_t>(batch.truth.rows()) != n)
    throw std::invalid_argument("loss_and_gradient: batch is not planned");
  ColorBatch rendered(static_cast<Eigen::Index>(n), 3);
  parallel_for(kChunks, threads, [&](std::size_t chunk) {
    const auto [begin, end] = chunk_range(n, chunk);
    RayState s;
    for (std::size_t i = begin; i < end; ++i) {
      forward_ray(field, batch.rays[i], batch.plans[i], s);
      rendered.row(static_cast<Eigen::Index>(i)) = s.color.transpose();
    }
  });

  ColorBatch d_color;
  if (grad) d_color.setZero(rendered.rows(), 3);
  const LossValue value = total_loss(rendered, batch.truth, loss, grad ? &d_color : nullptr);

  if (grad) {
    if (grad->size() != field.params().size()) throw std::invalid_argument("gradient buffer size mismatch");
    std::vector<Eigen::VectorXd> partial(kChunks);
    parallel_for(kChunks, threads, [&](std::size_t chunk) {
      const auto [begin, end] = chunk_range(n, chunk);
      partial[chunk].setZero(field.params().size());
      RayState s;
      for (std::size_t i = begin; i < end; ++i) {
        forward_ray(field, batch.rays[i], batch.plans[i], s);
        const Vec3 g = d_color.row(static_cast<Eigen::Index>(i)).transpose();
        if (g.isZero(0.0)) continue;
        backward_ray(field, batch.plans[i], s, g, partial[chunk]);
      }
    });
    for (const auto& p : partial) *grad += p;
  }
  if (rendered_out) *rendered_out = std::move(rendered);
  return value;
}

TrainResult train_region(std::span<const CameraPose> cameras, std::span<const Image> images,
                         const SceneFrame& scene, VoxelGridField init, const TrainConfig& config,
                         const LossParams& loss, const SamplingParams& sampling) {
  if (cameras.empty()) throw DataError("train_region: region has no cameras");
  if (config.batch_rays < 1 || config.iterations < 0 || !(config.lr_start > 0.0) ||
      !(config.lr_end > 0.0) || config.lr_end > config.lr_start)
    throw std::invalid_argument("train_region: invalid TrainConfig");

  TrainResult result{std::move(init), {}};
  VoxelGridField& field = result.field;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(field.params().size());
  Eigen::VectorXd grad(field.params().size());
  result.loss_curve.reserve(config.iterations);

  for (int it = 0; it < config.iterations; ++it) {
    const auto step_seed = derive_seed(config.seed, static_cast<std::uint64_t>(it));
    Rng rng(step_seed);
    RayBatch batch = sample_ray_batch(cameras, images, config.batch_rays, rng);
    plan_ray_batch(batch, field, scene, sampling, derive_seed(step_seed, sampling.seed), config.threads);

    LossParams lp = loss;
    lp.seed = derive_seed(loss.seed, step_seed);
    grad.setZero();
    const LossValue v = loss_and_gradient(field, batch, lp, &grad, config.threads);
    if (!std::isfinite(v.total) || !grad.allFinite())
      throw NumericalError("training diverged at iteration " + std::to_string(it));
    result.loss_curve.push_back(v.total);

    velocity = config.momentum * velocity + grad;
    field.params() -= learning_rate(config, it) * velocity;
  }
  return result;
}

Aabb region_bounds(std::span<const CameraPose> cameras, const SceneFrame& scene, double margin) {
  constexpr int kGrid = 9;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  bool any = false;
  for (const auto& pose : cameras) {
    for (int gy = 0; gy < kGrid; ++gy)
      for (int gx = 0; gx < kGrid; ++gx) {
        const double px = std::min(pose.width * double(gx) / (kGrid - 1), std::nextafter(pose.width, 0.0));
        const double py = std::min(pose.height * double(gy) / (kGrid - 1), std::nextafter(pose.height, 0.0));
        const Ray ray = pixel_ray(pose, px, py);
        const RayRange range = bounded_range(ray, scene);
        if (range.mode == SampleMode::unbounded) continue;
        for (double t : {range.near, range.far}) {
          const Vec3 p = ray.at(t);
          lo = lo.cwiseMin(p);
          hi = hi.cwiseMax(p);
        }
        any = true;
      }
  }
  if (!any) throw DataError("region_bounds: no camera ray reaches the scene");
  const Vec3 pad = ((hi - lo) * margin).cwiseMax(Vec3::Constant(0.5));
  return {lo - pad, hi + pad};
}

Eigen::Vector3i resolution_for_budget(const Aabb& box, long vertex_budget) {
  if (vertex_budget < 8) throw std::invalid_argument("vertex budget must be >= 8");
  const Vec3 e = box.extent();
  const double k = std::cbrt(static_cast<double>(vertex_budget) / (e.x() * e.y() * e.z()));
  Eigen::Vector3i n;
  for (int a = 0; a < 3; ++a) n[a] = std::max(2, static_cast<int>(std::floor(k * e[a])));
  auto product = [&n] { return long(n.x()) * n.y() * n.z(); };
  while (product() > vertex_budget) {
    int a = 0;
    for (int b = 1; b < 3; ++b)
      if (n[b] > n[a]) a = b;
    if (n[a] <= 2) break;
    --n[a];
  }
  for (bool grew = true; grew;) {
    grew = false;
    int best = -1;
    for (int a = 0; a < 3; ++a) {
      ++n[a];
      const bool fits = product() <= vertex_budget;
      --n[a];
      if (fits && (best < 0 || e[a] / n[a] > e[best] / n[best])) best = a;
    }
    if (best >= 0) {
      ++n[best];
      grew = true;
    }
  }
  return n;
}

}  // namespace aerial
