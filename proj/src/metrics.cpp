#include "aerial/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aerial {
namespace {

void check_same_shape(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image sizes differ");
  if (a.width <= 0 || a.height <= 0) throw std::invalid_argument("empty image");
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_shape(a, b);
  const double mse = (a.pixels - b.pixels).squaredNorm() / static_cast<double>(a.pixels.size());
  if (mse < 1e-10) return 100.0;
  return -10.0 * std::log10(mse);
}

double ssim_grid(const ColorBatch& x, const ColorBatch& y, int width, int height, const SsimOptions& o,
                 ColorBatch* grad_x) {
  if (x.rows() != Eigen::Index(width) * height || y.rows() != x.rows())
    throw std::invalid_argument("ssim: grid size mismatch");
  const int w = o.window;
  if (w < 1 || o.stride < 1 || w > width || w > height) throw std::invalid_argument("ssim: bad window");
  const double n = static_cast<double>(w) * w;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(w) * w);
  double total = 0.0;
  long count = 0;
  std::vector<std::pair<int, int>> origins;
  for (int oy = 0; oy + w <= height; oy += o.stride)
    for (int ox = 0; ox + w <= width; ox += o.stride) origins.emplace_back(ox, oy);
  const double windows = static_cast<double>(origins.size()) * 3.0;

  for (const auto& [ox, oy] : origins) {
    std::size_t k = 0;
    for (int dy = 0; dy < w; ++dy)
      for (int dx = 0; dx < w; ++dx) idx[k++] = Eigen::Index(oy + dy) * width + (ox + dx);
    for (int c = 0; c < 3; ++c) {
      double mx = 0.0, my = 0.0;
      for (auto i : idx) {
        mx += x(i, c);
        my += y(i, c);
      }
      mx /= n;
      my /= n;
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (auto i : idx) {
        const double a = x(i, c) - mx, b = y(i, c) - my;
        vx += a * a;
        vy += b * b;
        cxy += a * b;
      }
      vx /= n;
      vy /= n;
      cxy /= n;
      const double a1 = 2.0 * mx * my + o.c1, a2 = 2.0 * cxy + o.c2;
      const double b1 = mx * mx + my * my + o.c1, b2 = vx + vy + o.c2;
      total += (a1 * a2) / (b1 * b2);
      ++count;
      if (grad_x) {
        // d/dx_k of A1 A2 / (B1 B2), scaled by the 1/windows mean.
        const double inv = 1.0 / (b1 * b2);
        const double s = a1 * a2 * inv;
        for (auto i : idx) {
          const double da1 = 2.0 * my / n, da2 = 2.0 * (y(i, c) - my) / n;
          const double db1 = 2.0 * mx / n, db2 = 2.0 * (x(i, c) - mx) / n;
          const double d = (da1 * a2 + a1 * da2) * inv - s * (db1 / b1 + db2 / b2);
          (*grad_x)(i, c) += d / windows;
        }
      }
    }
  }
  return total / static_cast<double>(count);
}

double ssim(const Image& a, const Image& b, const SsimOptions& options) {
  check_same_shape(a, b);
  SsimOptions o = options;
  o.window = std::min({o.window, a.width, a.height});
  return ssim_grid(a.pixels, b.pixels, a.width, a.height, o);
}

double loss_mse(const ColorBatch& rendered, const ColorBatch& truth, ColorBatch* grad) {
  if (rendered.rows() != truth.rows()) throw std::invalid_argument("loss_mse: batch length mismatch");
  if (rendered.rows() == 0) throw std::invalid_argument("loss_mse: empty batch");
  const double n = static_cast<double>(rendered.rows());
  if (grad) *grad += (2.0 / n) * (rendered - truth);
  return (rendered - truth).rowwise().squaredNorm().sum() / n;
}

int s3im_patch_side(const LossParams& params, Eigen::Index batch) {
  if (params.s3im_patch_side > 0) return params.s3im_patch_side;
  const Eigen::Index m = std::max(1, params.s3im_patches);
  if (batch >= m * 64 * 64) return 64;
  return static_cast<int>(std::floor(std::sqrt(static_cast<double>(batch / m))));
}

double loss_s3im(const ColorBatch& rendered, const ColorBatch& truth, const LossParams& params,
                 ColorBatch* grad) {
  if (rendered.rows() != truth.rows()) throw std::invalid_argument("loss_s3im: batch length mismatch");
  if (params.s3im_patches < 1) throw std::invalid_argument("loss_s3im: need at least one patch");
  const Eigen::Index batch = rendered.rows();
  const int side = s3im_patch_side(params, batch);
  const Eigen::Index per_patch = Eigen::Index(side) * side;
  if (side < 1 || per_patch * params.s3im_patches > batch)
    throw std::invalid_argument("loss_s3im: batch of " + std::to_string(batch) + " rays is smaller than " +
                                std::to_string(params.s3im_patches) + " patches of side " +
                                std::to_string(std::max(side, 1)));

  SsimOptions o{std::min(params.ssim_window, side), std::min(params.ssim_window, side), params.ssim_c1,
                params.ssim_c2};
  Rng rng(params.seed);
  std::vector<Eigen::Index> perm(batch);
  ColorBatch px(per_patch, 3), py(per_patch, 3), pg(per_patch, 3);
  double sum = 0.0;
  const double m = params.s3im_patches;
  for (int p = 0; p < params.s3im_patches; ++p) {
    std::iota(perm.begin(), perm.end(), Eigen::Index(0));
    for (Eigen::Index i = 0; i < per_patch; ++i) {  // partial Fisher-Yates
      const Eigen::Index j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(batch - i)));
      std::swap(perm[i], perm[j]);
    }
    for (Eigen::Index i = 0; i < per_patch; ++i) {
      px.row(i) = rendered.row(perm[i]);
      py.row(i) = truth.row(perm[i]);
    }
    if (grad) pg.setZero();
    sum += ssim_grid(px, py, side, side, o, grad ? &pg : nullptr);
    if (grad)
      for (Eigen::Index i = 0; i < per_patch; ++i) grad->row(perm[i]) -= pg.row(i) / m;
  }
  return 1.0 - sum / m;
}

LossValue total_loss(const ColorBatch& rendered, const ColorBatch& truth, const LossParams& params,
                     ColorBatch* grad) {
  if (params.lambda_mse < 0.0 || params.lambda_s3im < 0.0)
    throw std::invalid_argument("loss weights must be non-negative");
  LossValue v;
  ColorBatch g;
  if (grad) g.setZero(rendered.rows(), 3);
  if (params.lambda_mse > 0.0) {
    ColorBatch gm;
    if (grad) gm.setZero(rendered.rows(), 3);
    v.mse = loss_mse(rendered, truth, grad ? &gm : nullptr);
    if (grad) g += params.lambda_mse * gm;
  } else {
    v.mse = loss_mse(rendered, truth);
  }
  if (params.lambda_s3im > 0.0) {
    ColorBatch gs;
    if (grad) gs.setZero(rendered.rows(), 3);
    v.s3im = loss_s3im(rendered, truth, params, grad ? &gs : nullptr);
    if (grad) g += params.lambda_s3im * gs;
  }
  v.total = params.lambda_mse * v.mse + params.lambda_s3im * v.s3im;
  if (grad) *grad += g;
  return v;
}

}  // namespace aerial
