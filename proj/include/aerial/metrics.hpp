#pragma once

#include "aerial/core.hpp"

namespace aerial {

/// Uniform-window SSIM settings. Variances and covariance use the
/// population (1/n) normalisation; every color channel is scored separately
/// and averaged.
struct SsimOptions {
  int window = 8;
  int stride = 1;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/// PSNR in dB for [0, 1] images, capped at 100 dB when MSE < 1e-10.
double psnr(const Image& a, const Image& b);

/// Mean local SSIM (8x8 uniform window, stride 1 by default). Images smaller
/// than the window use a window equal to their smaller side.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

/// Mean SSIM over the windows of a width x height pixel grid stored as rows
/// of `x` and `y`. When `grad_x` is given, d(mean)/dx is added to it.
double ssim_grid(const ColorBatch& x, const ColorBatch& y, int width, int height, const SsimOptions& options,
                 ColorBatch* grad_x = nullptr);

struct LossParams {
  double lambda_mse = 1.0;
  double lambda_s3im = 1.0;
  int s3im_patches = 10;
  /// Pixels per pseudo-patch side; 0 picks 64 when the batch holds M 64x64
  /// patches and the largest fitting square otherwise.
  int s3im_patch_side = 0;
  int ssim_window = 8;
  double ssim_c1 = 0.01 * 0.01;
  double ssim_c2 = 0.03 * 0.03;
  std::uint64_t seed = 0;
};

/// Mean over rays of the squared L2 color error.
double loss_mse(const ColorBatch& rendered, const ColorBatch& truth, ColorBatch* grad = nullptr);

int s3im_patch_side(const LossParams& params, Eigen::Index batch);

/// 1 - mean SSIM over M seeded random pseudo-patches (window = stride =
/// ssim_window, clamped to the patch side).
double loss_s3im(const ColorBatch& rendered, const ColorBatch& truth, const LossParams& params,
                 ColorBatch* grad = nullptr);

struct LossValue {
  double total = 0.0;
  double mse = 0.0;
  double s3im = 0.0;
};

/// lambda_mse * MSE + lambda_s3im * S3IM. Terms with zero weight are skipped.
LossValue total_loss(const ColorBatch& rendered, const ColorBatch& truth, const LossParams& params,
                     ColorBatch* grad = nullptr);

}  // namespace aerial
