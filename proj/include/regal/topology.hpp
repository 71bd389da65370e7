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
#include <utility>
#include <vector>

#include "regal/mesh.hpp"

namespace regal {

/// vertex -> incident faces (ascending), built once per mesh.
class VertexFaces {
 public:
  explicit VertexFaces(const TriangleMesh& mesh);
  std::span<const Index> operator[](Index v) const {
    return {faces_.data() + offsets_[v], faces_.data() + offsets_[v + 1]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Index> faces_;
};

/// Partition of `faces` into groups connected through shared edges. Groups
/// are sorted by size (descending), ties by lowest face id; each group is
/// sorted ascending.
std::vector<std::vector<Index>> connected_components(const TriangleMesh& mesh, std::span<const Index> faces);

/// Faces sharing at least one vertex with `face`, including itself, ascending.
std::vector<Index> one_ring_faces(const TriangleMesh& mesh, Index face);
std::vector<Index> one_ring_faces(const TriangleMesh& mesh, const VertexFaces& adjacency, Index face);

/// Unique undirected edges (i < j), sorted.
std::vector<std::pair<Index, Index>> mesh_edges(const TriangleMesh& mesh);

/// Faces of `mesh` restricted to `faces`, re-indexed compactly.
/// `to_parent[i]` is the original index of local vertex i.
struct Submesh {
  TriangleMesh mesh;
  std::vector<Index> to_parent;
};
Submesh extract_submesh(const TriangleMesh& mesh, std::span<const Index> faces);

/// 1-to-4 midpoint subdivision. Original vertices keep their indices; face f
/// becomes faces 4f .. 4f+3, the last one being the centre triangle.
TriangleMesh subdivide_midpoint(const TriangleMesh& mesh);

/// Edge-hop distance of every vertex from `seeds` (seeds are 0). Vertices
/// farther than `max_rings` hops, or unreachable, get -1.
std::vector<int> vertex_ring_distance(const TriangleMesh& mesh, std::span<const Index> seeds, int max_rings);

}  // namespace regal
