#pragma once

#include <span>
#include <vector>

#include "aerial/dispatch.hpp"
#include "aerial/field.hpp"
#include "aerial/sampling.hpp"

namespace aerial {

struct RayRadiance {
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
  std::vector<double> weights;  ///< T_i (1 - exp(-sigma_i delta_i)).
};

/// Alpha compositing over black: C = sum T_i (1 - exp(-sigma_i delta_i)) c_i
/// with T_i = exp(-sum_{j<i} sigma_j delta_j). Throws NumericalError naming
/// the first NaN or negative density.
RayRadiance integrate_ray(std::span<const double> deltas, std::span<const FieldSample> samples);
RayRadiance integrate_ray(const SampleSpec& spec, std::span<const FieldSample> samples);

struct RenderParams {
  SamplingParams sampling;
  unsigned threads = 0;  ///< 0 = hardware concurrency.
};

struct RenderTiming {
  double wall_seconds = 0.0;
  std::uint64_t field_queries = 0;
};

struct RenderResult {
  Image image;
  Eigen::VectorXd transmittance;  ///< Per pixel, 1 - opacity.
  RenderTiming timing;
};

/// Hierarchical render of one radiance field: coarse pass, fine inverse-CDF
/// pass, composite over the merged samples. Coarse values are reused in the
/// merged pass. Ray i uses random stream derive_seed(sampling.seed, i).
RenderResult render_view(const CameraPose& pose, const RadianceField& field, const SceneFrame& scene,
                         const RenderParams& params);

/// Renders each selected region with its own field and averages the images.
/// `fields[r]` is region r's field.
RenderResult render_image(const CameraPose& pose, const DispatchDecision& decision,
                          std::span<const RadianceField* const> fields, const SceneFrame& scene,
                          const RenderParams& params);

/// Baseline: every sample point queries every field and uses the mean color
/// and mean density.
RenderResult render_fusion_baseline(const CameraPose& pose, std::span<const RadianceField* const> fields,
                                    const SceneFrame& scene, const RenderParams& params);

}  // namespace aerial
