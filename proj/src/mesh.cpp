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

#include "regal/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <Eigen/Geometry>

namespace regal {

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite())
      fail(ErrorCode::InvalidArgument, "vertex " + std::to_string(i) + " has a non-finite coordinate");
  }
  const auto n = vertices_.size();
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& t = faces_[f];
    for (Index v : t) {
      if (v >= n)
        fail(ErrorCode::InvalidArgument, "face " + std::to_string(f) + " references vertex " +
                                             std::to_string(v) + " but the mesh has " +
                                             std::to_string(n) + " vertices");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      fail(ErrorCode::InvalidArgument, "face " + std::to_string(f) + " repeats a vertex");
  }
}

Vec3 TriangleMesh::face_centroid(Index f) const {
  const Face& t = faces_[f];
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

double TriangleMesh::face_area(Index f) const {
  const Face& t = faces_[f];
  return 0.5 * (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
}

std::vector<Index> TriangleMesh::degenerate_faces(double eps) const {
  std::vector<Index> out;
  for (Index f = 0; f < faces_.size(); ++f)
    if (face_area(f) <= eps) out.push_back(f);
  return out;
}

TriangleMesh TriangleMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size())
    fail(ErrorCode::TopologyMismatch, "vertex count " + std::to_string(vertices.size()) +
                                          " does not match mesh with " +
                                          std::to_string(vertices_.size()) + " vertices");
  return TriangleMesh(std::move(vertices), faces_);
}

KeypointSet::KeypointSet(std::vector<Index> indices, std::size_t semantic_count)
    : indices_(std::move(indices)), semantic_count_(semantic_count) {
  std::unordered_set<Index> seen;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (!seen.insert(indices_[i]).second)
      fail(ErrorCode::InvalidArgument,
           "keypoint " + std::to_string(i) + " repeats vertex " + std::to_string(indices_[i]));
  }
  if (semantic_count_ != 0 && indices_.size() != semantic_count_)
    fail(ErrorCode::InvalidArgument, "keypoint set has " + std::to_string(indices_.size()) +
                                         " entries, scheme expects " +
                                         std::to_string(semantic_count_));
}

void KeypointSet::validate_for(const TriangleMesh& mesh) const {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= mesh.vertex_count())
      fail(ErrorCode::InvalidArgument, "keypoint " + std::to_string(i) + " references vertex " +
                                           std::to_string(indices_[i]) + " outside the mesh");
  }
}

std::vector<Vec3> KeypointSet::positions(const TriangleMesh& mesh) const {
  validate_for(mesh);
  std::vector<Vec3> out;
  out.reserve(indices_.size());
  for (Index v : indices_) out.push_back(mesh.vertex(v));
  return out;
}

RegionMask::RegionMask(const TriangleMesh& mesh, std::vector<Index> face_ids) : face_ids_(std::move(face_ids)) {
  std::sort(face_ids_.begin(), face_ids_.end());
  face_ids_.erase(std::unique(face_ids_.begin(), face_ids_.end()), face_ids_.end());
  if (face_ids_.empty()) fail(ErrorCode::Empty, "region mask is empty");
  if (face_ids_.back() >= mesh.face_count())
    fail(ErrorCode::InvalidArgument, "region references face " + std::to_string(face_ids_.back()) +
                                         " but the mesh has " + std::to_string(mesh.face_count()) +
                                         " faces");
  vertex_ids_.reserve(face_ids_.size() * 3);
  for (Index f : face_ids_)
    for (Index v : mesh.face(f)) vertex_ids_.push_back(v);
  std::sort(vertex_ids_.begin(), vertex_ids_.end());
  vertex_ids_.erase(std::unique(vertex_ids_.begin(), vertex_ids_.end()), vertex_ids_.end());
}

bool RegionMask::contains_face(Index f) const {
  return std::binary_search(face_ids_.begin(), face_ids_.end(), f);
}

bool RegionMask::contains_vertex(Index v) const {
  return std::binary_search(vertex_ids_.begin(), vertex_ids_.end(), v);
}

void CorrespondenceMap::add_vertex(Index source_vertex, Index target_vertex) {
  if (kind_ != MapKind::VertexToVertex)
    fail(ErrorCode::InvalidArgument, "vertex entry added to a vertex-to-point map");
  entries_.push_back({source_vertex, target_vertex, {1.0, 0.0, 0.0}});
}

void CorrespondenceMap::add_point(Index source_vertex, Index target_face, const Barycentric& bary) {
  if (kind_ != MapKind::VertexToPoint)
    fail(ErrorCode::InvalidArgument, "point entry added to a vertex-to-vertex map");
  const double sum = bary[0] + bary[1] + bary[2];
  if (bary[0] < 0.0 || bary[1] < 0.0 || bary[2] < 0.0 || std::abs(sum - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument,
         "barycentric coordinates for source vertex " + std::to_string(source_vertex) +
             " are not a convex combination");
  entries_.push_back({source_vertex, target_face, bary});
}

void CorrespondenceMap::validate_for(const TriangleMesh& target) const {
  const std::size_t limit = kind_ == MapKind::VertexToVertex ? target.vertex_count() : target.face_count();
  for (const Entry& e : entries_) {
    if (e.target >= limit)
      fail(ErrorCode::InvalidArgument,
           std::string("correspondence for source vertex ") + std::to_string(e.source_vertex) +
               " references target " + (kind_ == MapKind::VertexToVertex ? "vertex " : "face ") +
               std::to_string(e.target) + " out of range");
  }
}

std::vector<Vec3> map_target_coordinates(const CorrespondenceMap& map, const TriangleMesh& target) {
  map.validate_for(target);
  std::vector<Vec3> out;
  out.reserve(map.size());
  if (map.kind() == MapKind::VertexToVertex) {
    for (const auto& e : map.entries()) out.push_back(target.vertex(e.target));
  } else {
    for (const auto& e : map.entries()) out.push_back(interpolate(target, e.target, e.bary));
  }
  return out;
}

}  // namespace regal
