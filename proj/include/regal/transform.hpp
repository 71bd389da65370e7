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

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "regal/mesh.hpp"

namespace regal {

using Mat3 = Eigen::Matrix3d;

/// x -> scale * rotation * x + translation. Rigid when scale == 1.
struct SimilarityTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  static SimilarityTransform identity() { return {}; }
  /// Rotation by `angle` radians about `axis` (normalised internally).
  static SimilarityTransform from_axis_angle(const Vec3& axis, double angle, const Vec3& translation = Vec3::Zero(),
                                             double scale = 1.0);

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  std::vector<Vec3> apply(std::span<const Vec3> points) const;
  TriangleMesh apply(const TriangleMesh& mesh) const;

  /// (*this) after `inner`: x -> this(inner(x)).
  SimilarityTransform compose(const SimilarityTransform& inner) const;
  SimilarityTransform inverse() const;

  /// Throws unless the rotation is orthonormal with det +1 (within `tol`) and scale > 0.
  void validate(double tol = 1e-9) const;
};

/// Angle (radians) of the relative rotation a^T b.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Closed-form weighted least-squares fit of `src` onto `dst`:
/// minimises sum_i w_i |s R src_i + t - dst_i|^2 over proper rotations R.
/// With `with_scale == false` the scale is fixed at 1. An empty `weights`
/// span means unit weights.
///
/// Throws Error(InvalidArgument) for fewer than three pairs, mismatched
/// lengths or non-positive weights, and Error(Degenerate) when the source
/// points are coincident or collinear (rotation about their line is free).
SimilarityTransform solve_similarity(std::span<const Vec3> src, std::span<const Vec3> dst,
                                     std::span<const double> weights, bool with_scale);

/// sum_i w_i |T(src_i) - dst_i|^2
double weighted_residual(const SimilarityTransform& transform, std::span<const Vec3> src,
                         std::span<const Vec3> dst, std::span<const double> weights);

}  // namespace regal
