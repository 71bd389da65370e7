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

// Core data model: triangle meshes (millimetre coordinates), landmark sets,
// face-based region masks and directed correspondence maps.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "regal/error.hpp"

namespace regal {

using Vec3 = Eigen::Vector3d;
using Index = std::uint32_t;
using Face = std::array<Index, 3>;
using Barycentric = std::array<double, 3>;

class TriangleMesh {
 public:
  TriangleMesh() = default;
  /// Throws Error(InvalidArgument) when an invariant is violated: face index
  /// out of range, repeated vertex within a face, or a non-finite coordinate.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }
  bool empty() const noexcept { return faces_.empty(); }

  const Vec3& vertex(Index v) const { return vertices_[v]; }
  const Face& face(Index f) const { return faces_[f]; }
  Vec3 face_centroid(Index f) const;
  double face_area(Index f) const;

  /// Faces whose area is zero (or below `eps` mm^2). Loading accepts these;
  /// callers may warn.
  std::vector<Index> degenerate_faces(double eps = 1e-12) const;

  /// Same topology, new positions. Throws if the count differs.
  TriangleMesh with_vertices(std::vector<Vec3> vertices) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

/// Ordered semantic landmarks stored as vertex indices of a host mesh.
class KeypointSet {
 public:
  KeypointSet() = default;
  /// `semantic_count` of 0 means no scheme is declared.
  explicit KeypointSet(std::vector<Index> indices, std::size_t semantic_count = 0);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t semantic_count() const noexcept { return semantic_count_; }
  Index operator[](std::size_t i) const { return indices_[i]; }

  void validate_for(const TriangleMesh& mesh) const;
  std::vector<Vec3> positions(const TriangleMesh& mesh) const;

 private:
  std::vector<Index> indices_;
  std::size_t semantic_count_ = 0;
};

/// Number of landmarks in the standard evaluation scheme.
inline constexpr std::size_t kEvaluationKeypointCount = 68;

/// A non-empty set of faces on a host mesh, plus the vertices they touch.
/// Both lists are sorted ascending and duplicate-free.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(const TriangleMesh& mesh, std::vector<Index> face_ids);

  const std::vector<Index>& face_ids() const noexcept { return face_ids_; }
  const std::vector<Index>& vertex_ids() const noexcept { return vertex_ids_; }
  bool empty() const noexcept { return face_ids_.empty(); }
  bool contains_face(Index f) const;
  bool contains_vertex(Index v) const;

 private:
  std::vector<Index> face_ids_;
  std::vector<Index> vertex_ids_;
};

enum class MapKind { VertexToVertex, VertexToPoint };

/// Directed map from vertices of a source mesh to a target mesh, either to
/// target vertices or to points inside target faces.
class CorrespondenceMap {
 public:
  struct Entry {
    Index source_vertex = 0;
    Index target = 0;  // vertex id or face id depending on kind
    Barycentric bary{1.0, 0.0, 0.0};
  };

  CorrespondenceMap() = default;
  CorrespondenceMap(MapKind kind, std::string source_id, std::string target_id)
      : kind_(kind), source_id_(std::move(source_id)), target_id_(std::move(target_id)) {}

  MapKind kind() const noexcept { return kind_; }
  const std::string& source_id() const noexcept { return source_id_; }
  const std::string& target_id() const noexcept { return target_id_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  void reserve(std::size_t n) { entries_.reserve(n); }
  void add_vertex(Index source_vertex, Index target_vertex);
  void add_point(Index source_vertex, Index target_face, const Barycentric& bary);

  /// Throws when a target reference is out of range for `target`.
  void validate_for(const TriangleMesh& target) const;

 private:
  MapKind kind_ = MapKind::VertexToPoint;
  std::string source_id_;
  std::string target_id_;
  std::vector<Entry> entries_;
};

/// Positions on `target` addressed by each map entry, in entry order.
std::vector<Vec3> map_target_coordinates(const CorrespondenceMap& map, const TriangleMesh& target);

inline Vec3 interpolate(const TriangleMesh& mesh, Index f, const Barycentric& b) {
  const Face& t = mesh.face(f);
  return b[0] * mesh.vertex(t[0]) + b[1] * mesh.vertex(t[1]) + b[2] * mesh.vertex(t[2]);
}

}  // namespace regal
