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

#include "regal/topology.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <unordered_map>

namespace regal {
namespace {

std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct DisjointSets {
  std::vector<Index> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

VertexFaces::VertexFaces(const TriangleMesh& mesh) : offsets_(mesh.vertex_count() + 1, 0) {
  for (const Face& f : mesh.faces())
    for (Index v : f) ++offsets_[v + 1];
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  faces_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (Index f = 0; f < mesh.face_count(); ++f)
    for (Index v : mesh.face(f)) faces_[cursor[v]++] = f;
}

std::vector<std::vector<Index>> connected_components(const TriangleMesh& mesh, std::span<const Index> faces) {
  std::vector<Index> sorted(faces.begin(), faces.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (Index f : sorted)
    if (f >= mesh.face_count()) fail(ErrorCode::InvalidArgument, "face id " + std::to_string(f) + " out of range");

  DisjointSets sets(sorted.size());
  std::unordered_map<std::uint64_t, Index> first_owner;
  first_owner.reserve(sorted.size() * 3);
  for (Index i = 0; i < sorted.size(); ++i) {
    const Face& t = mesh.face(sorted[i]);
    for (int e = 0; e < 3; ++e) {
      auto [it, inserted] = first_owner.emplace(edge_key(t[e], t[(e + 1) % 3]), i);
      if (!inserted) sets.unite(i, it->second);
    }
  }
  std::map<Index, std::vector<Index>> groups;
  for (Index i = 0; i < sorted.size(); ++i) groups[sets.find(i)].push_back(sorted[i]);
  std::vector<std::vector<Index>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return out;
}

std::vector<Index> one_ring_faces(const TriangleMesh& mesh, const VertexFaces& adjacency, Index face) {
  if (face >= mesh.face_count()) fail(ErrorCode::InvalidArgument, "face id " + std::to_string(face) + " out of range");
  std::vector<Index> out;
  for (Index v : mesh.face(face))
    for (Index f : adjacency[v]) out.push_back(f);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Index> one_ring_faces(const TriangleMesh& mesh, Index face) {
  return one_ring_faces(mesh, VertexFaces(mesh), face);
}

std::vector<std::pair<Index, Index>> mesh_edges(const TriangleMesh& mesh) {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(mesh.face_count() * 3);
  for (const Face& t : mesh.faces())
    for (int e = 0; e < 3; ++e) {
      Index a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Submesh extract_submesh(const TriangleMesh& mesh, std::span<const Index> faces) {
  std::vector<Index> local(mesh.vertex_count(), std::numeric_limits<Index>::max());
  Submesh sub;
  std::vector<Vec3> verts;
  std::vector<Face> out_faces;
  out_faces.reserve(faces.size());
  // Local vertex order follows ascending parent index.
  std::vector<Index> used;
  for (Index f : faces)
    for (Index v : mesh.face(f)) used.push_back(v);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  for (Index i = 0; i < used.size(); ++i) {
    local[used[i]] = i;
    verts.push_back(mesh.vertex(used[i]));
  }
  for (Index f : faces) {
    const Face& t = mesh.face(f);
    out_faces.push_back({local[t[0]], local[t[1]], local[t[2]]});
  }
  sub.mesh = TriangleMesh(std::move(verts), std::move(out_faces));
  sub.to_parent = std::move(used);
  return sub;
}

TriangleMesh subdivide_midpoint(const TriangleMesh& mesh) {
  std::vector<Vec3> verts = mesh.vertices();
  std::unordered_map<std::uint64_t, Index> midpoint;
  auto mid = [&](Index a, Index b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const auto id = static_cast<Index>(verts.size());
    verts.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    midpoint.emplace(key, id);
    return id;
  };
  std::vector<Face> faces;
  faces.reserve(mesh.face_count() * 4);
  for (const Face& t : mesh.faces()) {
    const Index ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    faces.push_back({t[0], ab, ca});
    faces.push_back({ab, t[1], bc});
    faces.push_back({ca, bc, t[2]});
    faces.push_back({ab, bc, ca});
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

std::vector<int> vertex_ring_distance(const TriangleMesh& mesh, std::span<const Index> seeds, int max_rings) {
  std::vector<std::vector<Index>> nbrs(mesh.vertex_count());
  for (const auto& [a, b] : mesh_edges(mesh)) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  std::vector<int> dist(mesh.vertex_count(), -1);
  std::deque<Index> queue;
  for (Index s : seeds) {
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    if (dist[v] >= max_rings) continue;
    for (Index n : nbrs[v]) {
      if (dist[n] < 0) {
        dist[n] = dist[v] + 1;
        queue.push_back(n);
      }
    }
  }
  return dist;
}

}  // namespace regal
