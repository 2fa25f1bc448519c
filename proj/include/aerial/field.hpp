#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "aerial/core.hpp"

namespace aerial {

struct FieldSample {
  Vec3 color = Vec3::Zero();
  double density = 0.0;  ///< 1/meter, >= 0.
};

/// Derivative of a scalar loss with respect to one FieldSample.
struct FieldSampleGrad {
  Vec3 d_color = Vec3::Zero();
  double d_density = 0.0;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();

  bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }
  Vec3 extent() const { return max - min; }
};

/// (position, direction) -> (color, density). Implementations must be safe
/// for concurrent queries.
class RadianceField {
 public:
  virtual ~RadianceField() = default;
  virtual FieldSample query(const Vec3& position, const Vec3& direction) const = 0;
};

class ConstantField final : public RadianceField {
 public:
  ConstantField(double density, const Vec3& color) : sample_{color, density} {}
  FieldSample query(const Vec3&, const Vec3&) const override { return sample_; }

 private:
  FieldSample sample_;
};

template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return (x > Scalar(0) ? x : Scalar(0)) + log1p(exp(-(x < Scalar(0) ? -x : x)));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar inverse_softplus(Scalar y) {
  using std::expm1;
  using std::log;
  return y > Scalar(30) ? y : log(expm1(y));
}

template <typename Scalar>
Scalar logit(Scalar p) {
  using std::log;
  return log(p / (Scalar(1) - p));
}

/// The 8 lattice vertices around a point and their trilinear weights.
struct TrilinearStencil {
  std::array<Eigen::Index, 8> vertex{};
  std::array<double, 8> weight{};
};

/// Trainable field on a regular lattice spanning `bbox`. Raw parameters are
/// interpolated trilinearly, then activated: softplus for density, logistic
/// for color. Direction is ignored. Outside the box the field is empty.
///
/// Parameter layout: [raw density per vertex | raw RGB per vertex,
/// interleaved], vertices x-fastest.
class VoxelGridField final : public RadianceField {
 public:
  VoxelGridField(const Aabb& bbox, const Eigen::Vector3i& resolution, double raw_density = -3.0,
                 const Vec3& raw_color = Vec3::Zero());

  FieldSample query(const Vec3& position, const Vec3& direction) const override;

  std::optional<TrilinearStencil> stencil(const Vec3& position) const;
  FieldSample evaluate(const TrilinearStencil& s) const;

  /// Adds dL/dparams for one query to `grad` (same layout as params()).
  void accumulate_gradient(const TrilinearStencil& s, const FieldSampleGrad& upstream,
                           Eigen::Ref<Eigen::VectorXd> grad) const;
  void query_gradient(const Vec3& position, const FieldSampleGrad& upstream,
                      Eigen::Ref<Eigen::VectorXd> grad) const;

  const Aabb& bbox() const { return bbox_; }
  const Eigen::Vector3i& resolution() const { return resolution_; }
  Eigen::Index vertex_count() const { return vertices_; }
  Eigen::Index vertex_index(int i, int j, int k) const {
    return i + Eigen::Index(resolution_.x()) * (j + Eigen::Index(resolution_.y()) * k);
  }
  Vec3 vertex_position(int i, int j, int k) const;

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  auto raw_density() { return params_.head(vertices_); }
  auto raw_density() const { return params_.head(vertices_); }
  auto raw_color(Eigen::Index v) { return params_.segment<3>(vertices_ + 3 * v); }
  auto raw_color(Eigen::Index v) const { return params_.segment<3>(vertices_ + 3 * v); }

 private:
  Aabb bbox_;
  Eigen::Vector3i resolution_;
  Eigen::Index vertices_;
  Vec3 scale_;  ///< World -> lattice coordinates.
  Eigen::VectorXd params_;
};

}  // namespace aerial
