// Copyright 2026 The regal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regal/transform.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace regal {

SimilarityTransform SimilarityTransform::from_axis_angle(const Vec3& axis, double angle, const Vec3& translation,
                                                         double scale) {
  SimilarityTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  t.translation = translation;
  t.scale = scale;
  return t;
}

std::vector<Vec3> SimilarityTransform::apply(std::span<const Vec3> points) const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(apply(p));
  return out;
}

TriangleMesh SimilarityTransform::apply(const TriangleMesh& mesh) const {
  return mesh.with_vertices(apply(std::span<const Vec3>(mesh.vertices())));
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& inner) const {
  SimilarityTransform t;
  t.rotation = rotation * inner.rotation;
  t.scale = scale * inner.scale;
  t.translation = scale * (rotation * inner.translation) + translation;
  return t;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform t;
  t.rotation = rotation.transpose();
  t.scale = 1.0 / scale;
  t.translation = -(t.scale * (t.rotation * translation));
  return t;
}

void SimilarityTransform::validate(double tol) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorCode::InvalidArgument, "transform scale must be positive");
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
    fail(ErrorCode::InvalidArgument, "transform rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > tol)
    fail(ErrorCode::InvalidArgument, "transform rotation is not proper (det != +1)");
  if (!translation.allFinite()) fail(ErrorCode::InvalidArgument, "transform translation is not finite");
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

SimilarityTransform solve_similarity(std::span<const Vec3> src, std::span<const Vec3> dst,
                                     std::span<const double> weights, bool with_scale) {
  const std::size_t n = src.size();
  if (n != dst.size()) fail(ErrorCode::InvalidArgument, "source and destination point counts differ");
  if (!weights.empty() && weights.size() != n) fail(ErrorCode::InvalidArgument, "weight count differs from point count");
  if (n < 3) fail(ErrorCode::InvalidArgument, "similarity solve needs at least 3 point pairs, got " + std::to_string(n));

  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double wsum = 0.0;
  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i)))
      fail(ErrorCode::InvalidArgument, "similarity weights must be positive and finite");
    wsum += w(i);
    mu_s += w(i) * src[i];
    mu_d += w(i) * dst[i];
  }
  mu_s /= wsum;
  mu_d /= wsum;

  Mat3 cov_ss = Mat3::Zero();
  Mat3 cov_ds = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 s = src[i] - mu_s;
    const Vec3 d = dst[i] - mu_d;
    cov_ss.noalias() += w(i) * s * s.transpose();
    cov_ds.noalias() += w(i) * d * s.transpose();
  }
  cov_ss /= wsum;
  cov_ds /= wsum;

  const Eigen::JacobiSVD<Mat3> shape(cov_ss);
  const Vec3 spread = shape.singularValues();
  if (!(spread(0) > 0.0)) fail(ErrorCode::Degenerate, "similarity solve: source points are coincident");
  if (spread(1) <= 1e-12 * spread(0))
    fail(ErrorCode::Degenerate, "similarity solve: source points are collinear, rotation about their line is ambiguous");

  const Eigen::JacobiSVD<Mat3> svd(cov_ds, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 sign = Vec3::Ones();
  // Reflection suppression: flip the direction of the smallest singular value.
  if (u.determinant() * v.determinant() < 0.0) sign(2) = -1.0;

  SimilarityTransform t;
  t.rotation = u * sign.asDiagonal() * v.transpose();
  if (with_scale) {
    const double var_s = cov_ss.trace();
    t.scale = svd.singularValues().dot(sign) / var_s;
    if (!(t.scale > 0.0)) fail(ErrorCode::Degenerate, "similarity solve: non-positive scale");
  }
  t.translation = mu_d - t.scale * (t.rotation * mu_s);
  return t;
}

double weighted_residual(const SimilarityTransform& transform, std::span<const Vec3> src, std::span<const Vec3> dst,
                         std::span<const double> weights) {
  double r = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i)
    r += (weights.empty() ? 1.0 : weights[i]) * (transform.apply(src[i]) - dst[i]).squaredNorm();
  return r;
}

}  // namespace regal
