#include "aerial/field.hpp"

#include <stdexcept>

namespace aerial {

VoxelGridField::VoxelGridField(const Aabb& bbox, const Eigen::Vector3i& resolution, double raw_density,
                               const Vec3& raw_color)
    : bbox_(bbox), resolution_(resolution) {
  if ((resolution.array() < 2).any()) throw std::invalid_argument("voxel grid resolution must be >= 2 per axis");
  if (!((bbox.max - bbox.min).array() > 0.0).all()) throw std::invalid_argument("voxel grid bbox is empty");
  vertices_ = Eigen::Index(resolution.x()) * resolution.y() * resolution.z();
  scale_ = (resolution.cast<double>().array() - 1.0) / (bbox.max - bbox.min).array();
  params_.resize(4 * vertices_);
  params_.head(vertices_).setConstant(raw_density);
  for (Eigen::Index v = 0; v < vertices_; ++v) params_.segment<3>(vertices_ + 3 * v) = raw_color;
}

Vec3 VoxelGridField::vertex_position(int i, int j, int k) const {
  return bbox_.min + Vec3(i, j, k).cwiseQuotient(scale_);
}

std::optional<TrilinearStencil> VoxelGridField::stencil(const Vec3& position) const {
  if (!bbox_.contains(position)) return std::nullopt;
  const Vec3 g = (position - bbox_.min).cwiseProduct(scale_);
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const int top = resolution_[a] - 2;
    int i = static_cast<int>(g[a]);
    if (i > top) i = top;
    if (i < 0) i = 0;
    base[a] = i;
    frac[a] = g[a] - i;
  }
  TrilinearStencil s;
  int n = 0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx, ++n) {
        s.vertex[n] = vertex_index(base[0] + dx, base[1] + dy, base[2] + dz);
        s.weight[n] = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                      (dz ? frac[2] : 1.0 - frac[2]);
      }
  return s;
}

FieldSample VoxelGridField::evaluate(const TrilinearStencil& s) const {
  double d = 0.0;
  Vec3 c = Vec3::Zero();
  for (int n = 0; n < 8; ++n) {
    d += s.weight[n] * params_[s.vertex[n]];
    c += s.weight[n] * params_.segment<3>(vertices_ + 3 * s.vertex[n]);
  }
  return {c.unaryExpr([](double x) { return sigmoid(x); }), softplus(d)};
}

FieldSample VoxelGridField::query(const Vec3& position, const Vec3& /*direction*/) const {
  const auto s = stencil(position);
  if (!s) return {};
  return evaluate(*s);
}

void VoxelGridField::accumulate_gradient(const TrilinearStencil& s, const FieldSampleGrad& upstream,
                                         Eigen::Ref<Eigen::VectorXd> grad) const {
  double d = 0.0;
  Vec3 c = Vec3::Zero();
  for (int n = 0; n < 8; ++n) {
    d += s.weight[n] * params_[s.vertex[n]];
    c += s.weight[n] * params_.segment<3>(vertices_ + 3 * s.vertex[n]);
  }
  // softplus' = sigmoid; sigmoid' = sigmoid (1 - sigmoid).
  const double g_density = upstream.d_density * sigmoid(d);
  const Vec3 act = c.unaryExpr([](double x) { return sigmoid(x); });
  const Vec3 g_color = upstream.d_color.cwiseProduct(act.cwiseProduct(Vec3::Ones() - act));
  for (int n = 0; n < 8; ++n) {
    const double w = s.weight[n];
    grad[s.vertex[n]] += w * g_density;
    grad.segment<3>(vertices_ + 3 * s.vertex[n]) += w * g_color;
  }
}

void VoxelGridField::query_gradient(const Vec3& position, const FieldSampleGrad& upstream,
                                    Eigen::Ref<Eigen::VectorXd> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
  if (const auto s = stencil(position)) accumulate_gradient(*s, upstream, grad);
}

}  // namespace aerial
