#pragma once

#include <span>
#include <vector>

#include "aerial/field.hpp"
#include "aerial/metrics.hpp"
#include "aerial/sampling.hpp"

namespace aerial {

/// SGD with momentum on voxel-grid parameters; the learning rate decays
/// exponentially from lr_start to lr_end over the run.
struct TrainConfig {
  int batch_rays = 4096;
  int iterations = 2000;
  double lr_start = 50.0;
  double lr_end = 5.0;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Rays with their ground-truth colors and frozen sample positions.
struct RayBatch {
  std::vector<Ray> rays;
  ColorBatch truth;
  std::vector<SampleSpec> plans;
};

struct TrainResult {
  VoxelGridField field;
  std::vector<double> loss_curve;
};

double learning_rate(const TrainConfig& config, int iteration);

/// Draws `count` uniformly random (camera, pixel) pairs; rays go through
/// pixel centers.
RayBatch sample_ray_batch(std::span<const CameraPose> cameras, std::span<const Image> images, int count,
                          Rng& rng);

/// Rays covering every pixel of the given views, in view then row-major order.
RayBatch full_image_batch(std::span<const CameraPose> cameras, std::span<const Image> images);

/// Places coarse and fine samples for every ray using the current field
/// (no gradient flows through sample placement). Ray i uses stream
/// derive_seed(seed, i).
void plan_ray_batch(RayBatch& batch, const RadianceField& field, const SceneFrame& scene,
                    const SamplingParams& sampling, std::uint64_t seed, unsigned threads = 0);

/// Renders the batch at its frozen samples, evaluates the loss and, when
/// `grad` is given, adds dL/dparams to it. Work is reduced over a fixed
/// number of chunks so results do not depend on the thread count.
LossValue loss_and_gradient(const VoxelGridField& field, const RayBatch& batch, const LossParams& loss,
                            Eigen::VectorXd* grad, unsigned threads = 0, ColorBatch* rendered = nullptr);

/// Fits `init` to the views. The returned loss curve has one entry per
/// iteration. Throws NumericalError if the loss becomes non-finite.
TrainResult train_region(std::span<const CameraPose> cameras, std::span<const Image> images,
                         const SceneFrame& scene, VoxelGridField init, const TrainConfig& config,
                         const LossParams& loss, const SamplingParams& sampling);

/// Axis-aligned box around the bounded sampling segments of a 9x9 grid of
/// rays spanning each image edge to edge, padded by `margin` x extent on every side.
Aabb region_bounds(std::span<const CameraPose> cameras, const SceneFrame& scene, double margin = 0.05);

/// Lattice resolution with at most `vertex_budget` vertices whose per-axis
/// counts follow the box aspect ratio (minimum 2 per axis).
Eigen::Vector3i resolution_for_budget(const Aabb& box, long vertex_budget);

}  // namespace aerial
