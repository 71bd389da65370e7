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

#include "regal/spatial_index.hpp"

#include <algorithm>
#include <numeric>

namespace regal {
namespace {
constexpr std::uint32_t kLeafSize = 4;
}

SpatialIndex::SpatialIndex(const TriangleMesh& mesh) : vertices_(mesh.vertices()), faces_(mesh.faces()) {
  if (faces_.empty()) return;
  order_.resize(faces_.size());
  std::iota(order_.begin(), order_.end(), Index{0});
  std::vector<Vec3> centroids(faces_.size());
  Aabb all;
  for (Index f = 0; f < faces_.size(); ++f) {
    centroids[f] = mesh.face_centroid(f);
    for (Index v : faces_[f]) all.extend(vertices_[v]);
  }
  // Boxes are padded slightly so rounding in computed closest points can
  // never place a candidate outside its node.
  const double pad = 1e-12 * std::max(1.0, all.diagonal());
  nodes_.reserve(2 * faces_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(faces_.size()), centroids, pad);
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids,
                                  double pad) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (Index v : faces_[order_[i]]) box.extend(vertices_[v]);
    cbox.extend(centroids[order_[i]]);
  }
  nodes_[id].box = box.inflated(pad);
  if (end - begin <= kLeafSize) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  int axis = 0;
  (cbox.hi - cbox.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](Index a, Index b) {
    const double ca = centroids[a][axis], cb = centroids[b][axis];
    return ca < cb || (ca == cb && a < b);
  });
  const std::uint32_t left = build(begin, mid, centroids, pad);
  const std::uint32_t right = build(mid, end, centroids, pad);
  nodes_[id].first = left;
  nodes_[id].right = right;
  nodes_[id].count = 0;
  return id;
}

void SpatialIndex::test_face(Index f, const Vec3& p, SurfacePoint& best) const {
  const Face& t = faces_[f];
  const TrianglePoint tp = closest_point_on_triangle(p, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
  const double d = (tp.point - p).squaredNorm();
  if (d < best.squared_distance || (d == best.squared_distance && f < best.face)) {
    best.face = f;
    best.bary = tp.bary;
    best.point = tp.point;
    best.squared_distance = d;
  }
}

SurfacePoint SpatialIndex::nearest(const Vec3& p) const {
  SurfacePoint best;
  if (nodes_.empty()) fail(ErrorCode::Empty, "nearest surface query on an empty mesh");
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(p) > best.squared_distance) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) test_face(order_[i], p, best);
      continue;
    }
    const double dl = nodes_[node.first].box.squared_distance(p);
    const double dr = nodes_[node.right].box.squared_distance(p);
    // Push the farther child first so the nearer one is explored first.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.first;
    } else {
      stack[top++] = node.first;
      stack[top++] = node.right;
    }
  }
  return best;
}

SurfacePoint nearest_surface_point(const Vec3& p, const TriangleMesh& mesh, const SpatialIndex& index) {
  if (mesh.empty() || index.empty()) fail(ErrorCode::Empty, "nearest surface query on an empty mesh");
  if (index.face_count() != mesh.face_count())
    fail(ErrorCode::InvalidArgument, "spatial index was built over a different mesh");
  return index.nearest(p);
}

std::vector<SurfacePoint> project_points(std::span<const Vec3> points, const SpatialIndex& index) {
  if (index.empty()) fail(ErrorCode::Empty, "nearest surface query on an empty mesh");
  std::vector<SurfacePoint> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(index.nearest(p));
  return out;
}

Index nearest_vertex(const Vec3& p, const TriangleMesh& mesh) {
  if (mesh.vertex_count() == 0) fail(ErrorCode::Empty, "nearest vertex query on an empty mesh");
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    const double d = (mesh.vertex(v) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

}  // namespace regal
