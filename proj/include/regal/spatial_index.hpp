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

#include <cmath>
#include <span>
#include <vector>

#include "regal/geometry.hpp"
#include "regal/mesh.hpp"

namespace regal {

struct SurfacePoint {
  Index face = 0;
  Barycentric bary{1.0, 0.0, 0.0};
  Vec3 point = Vec3::Zero();
  double squared_distance = std::numeric_limits<double>::infinity();

  double distance() const { return std::sqrt(squared_distance); }
};

/// Bounding-volume hierarchy over the triangles of one mesh. Queries are
/// exact: they return the same face, barycentric and distance as an
/// exhaustive scan, with ties resolved towards the lowest face id.
///
/// The index keeps its own copy of the geometry and is immutable after
/// construction, so it may be shared by concurrent readers.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(const TriangleMesh& mesh);

  bool empty() const noexcept { return faces_.empty(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  SurfacePoint nearest(const Vec3& p) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first slot in order_; inner: left child
    std::uint32_t count = 0;  // leaf: number of faces; inner: 0
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids, double pad);
  void test_face(Index f, const Vec3& p, SurfacePoint& best) const;

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

/// Globally nearest surface point of `mesh` to p; `index` must be built over
/// `mesh`. Throws Error(Empty) for a mesh without faces.
SurfacePoint nearest_surface_point(const Vec3& p, const TriangleMesh& mesh, const SpatialIndex& index);

/// Projects every point; convenience over nearest().
std::vector<SurfacePoint> project_points(std::span<const Vec3> points, const SpatialIndex& index);

/// Index of the nearest vertex, lowest index on ties. Linear scan.
Index nearest_vertex(const Vec3& p, const TriangleMesh& mesh);

}  // namespace regal
