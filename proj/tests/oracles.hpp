#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "aerial/core.hpp"
#include "aerial/sampling.hpp"

namespace oracle {

/// Upper-tail p-value of Pearson's statistic for observed bin counts against
/// expected probabilities. Bins with zero probability must be empty.
inline double chi_squared_p(std::span<const long> observed, std::span<const double> probabilities) {
  long total = 0;
  for (long o : observed) total += o;
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = probabilities[i] * static_cast<double>(total);
    if (expected <= 0.0) {
      if (observed[i] != 0) return 0.0;
      continue;
    }
    stat += (observed[i] - expected) * (observed[i] - expected) / expected;
    ++dof;
  }
  if (dof < 1) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Draws `draws` fine samples as independent single-sample calls and tests
/// the bin histogram against weights normalized to probabilities.
inline double fine_sampling_p(std::span<const double> edges, std::span<const double> weights, int draws,
                              aerial::Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> prob(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) prob[i] = weights[i] / total;
  std::vector<long> counts(weights.size(), 0);
  for (int k = 0; k < draws; ++k) {
    const double t = aerial::fine_samples_in_bins(edges, weights, 1, true, rng)[0];
    std::size_t b = 0;
    while (b + 1 < weights.size() && t >= edges[b + 1]) ++b;
    ++counts[b];
  }
  return chi_squared_p(counts, prob);
}

/// Scalar-loop PSNR over every channel value.
inline double psnr(const aerial::Image& a, const aerial::Image& b) {
  double sum = 0.0;
  long n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = a.pixels(a.index(x, y), c) - b.pixels(b.index(x, y), c);
        sum += d * d;
        ++n;
      }
  const double mse = sum / n;
  if (mse < 1e-10) return 100.0;
  return 20.0 * std::log10(1.0 / std::sqrt(mse));
}

/// Direct per-window SSIM on a row-major grid: per channel, per window,
/// two-pass moments with population normalisation.
inline double ssim_rows(const aerial::ColorBatch& x, const aerial::ColorBatch& y, int width, int height, int window,
                        int stride, double c1, double c2) {
  double total = 0.0;
  long count = 0;
  for (int c = 0; c < 3; ++c)
    for (int oy = 0; oy + window <= height; oy += stride)
      for (int ox = 0; ox + window <= width; ox += stride) {
        std::vector<double> a, b;
        for (int j = oy; j < oy + window; ++j)
          for (int i = ox; i < ox + window; ++i) {
            a.push_back(x(static_cast<Eigen::Index>(j) * width + i, c));
            b.push_back(y(static_cast<Eigen::Index>(j) * width + i, c));
          }
        const double n = static_cast<double>(a.size());
        double ma = 0.0, mb = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
          ma += a[k] / n;
          mb += b[k] / n;
        }
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
          va += (a[k] - ma) * (a[k] - ma) / n;
          vb += (b[k] - mb) * (b[k] - mb) / n;
          cov += (a[k] - ma) * (b[k] - mb) / n;
        }
        const double luminance = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        const double structure = (2 * cov + c2) / (va + vb + c2);
        total += luminance * structure;
        ++count;
      }
  return total / count;
}

inline double ssim(const aerial::Image& a, const aerial::Image& b) {
  const int window = std::min({8, a.width, a.height});
  return ssim_rows(a.pixels, b.pixels, a.width, a.height, window, 1, 1e-4, 9e-4);
}

/// S3IM with the documented patch sampler: per patch a fresh identity
/// permutation, side^2 steps of partial Fisher-Yates drawing
/// Rng(seed).below(batch - i), rows taken in that order as a row-major
/// side x side grid.
inline double s3im(const aerial::ColorBatch& rendered, const aerial::ColorBatch& truth, int patches, int side,
                   int window, double c1, double c2, std::uint64_t seed) {
  aerial::Rng rng(seed);
  const long batch = static_cast<long>(rendered.rows());
  const long per_patch = static_cast<long>(side) * side;
  const int w = std::min(window, side);
  double sum = 0.0;
  for (int p = 0; p < patches; ++p) {
    std::vector<long> order(batch);
    for (long i = 0; i < batch; ++i) order[i] = i;
    for (long i = 0; i < per_patch; ++i) std::swap(order[i], order[i + static_cast<long>(rng.below(batch - i))]);
    aerial::ColorBatch px(per_patch, 3), py(per_patch, 3);
    for (long i = 0; i < per_patch; ++i) {
      px.row(i) = rendered.row(order[i]);
      py.row(i) = truth.row(order[i]);
    }
    sum += ssim_rows(px, py, side, side, w, w, c1, c2);
  }
  return 1.0 - sum / patches;
}

}  // namespace oracle
