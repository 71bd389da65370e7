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

#include <limits>

#include "regal/mesh.hpp"

namespace regal {

struct TrianglePoint {
  Vec3 point;
  Barycentric bary;  // weights of a, b, c; non-negative, summing to one
};

/// Closest point of the closed triangle (a, b, c) to p. Zero-area triangles
/// fall back to the closest point on their edges.
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Closest point on segment [a, b]; `t` is the weight of b.
Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b, double& t);

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool valid() const { return (lo.array() <= hi.array()).all(); }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }
  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
  Aabb inflated(double margin) const {
    Aabb r = *this;
    r.lo.array() -= margin;
    r.hi.array() += margin;
    return r;
  }
  /// Squared distance from p to the box (zero inside).
  double squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(Vec3::Zero());
    return d.squaredNorm();
  }
};

}  // namespace regal
