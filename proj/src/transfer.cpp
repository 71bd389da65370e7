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

#include "regal/transfer.hpp"

#include <algorithm>
#include <map>

#include "regal/geometry.hpp"
#include "regal/spatial_index.hpp"
#include "regal/topology.hpp"

namespace regal {

namespace {

struct TransferContext {
  const TriangleMesh& low;
  const TriangleMesh& high;
  SpatialIndex low_index;
  SpatialIndex high_index;
  VertexFaces low_adj;
  VertexFaces high_adj;
  double tie = 0.0;

  TransferContext(const TriangleMesh& l, const TriangleMesh& h)
      : low(l), high(h), low_index(l), high_index(h), low_adj(l), high_adj(h) {
    Aabb box;
    for (const Vec3& p : l.vertices()) box.extend(p);
    tie = 1e-12 * box.diagonal();
  }
};

// Transfer of one connected piece of the low region; empty when the cavity
// filter removes everything.
std::vector<Index> transfer_piece(const TransferContext& ctx, const RegionMask& region_low,
                                  const RegionMask* exclusions, const TransferOptions& options) {
  const TriangleMesh& low = ctx.low;
  const TriangleMesh& high = ctx.high;
  const SpatialIndex& low_index = ctx.low_index;
  const SpatialIndex& high_index = ctx.high_index;
  const VertexFaces& low_adj = ctx.low_adj;
  const VertexFaces& high_adj = ctx.high_adj;
  const double tie = ctx.tie;

  // A point on an edge or vertex lies on every face sharing it, so a
  // boundary point counts as inside when any tied face is in the mask.
  auto lies_in = [&](const RegionMask& mask, const Vec3& p) {
    const SurfacePoint hit = low_index.nearest(p);
    if (mask.contains_face(hit.face)) return true;
    const double limit = hit.distance() + tie;
    for (Index g : one_ring_faces(low, low_adj, hit.face)) {
      if (!mask.contains_face(g)) continue;
      const Face& t = low.face(g);
      const Vec3 q = closest_point_on_triangle(p, low.vertex(t[0]), low.vertex(t[1]), low.vertex(t[2])).point;
      if ((q - p).norm() <= limit) return true;
    }
    return false;
  };

  // Forward projection. Hit faces are kept; their one-ring
  // neighbours only when the neighbour's centroid projects back into the
  // region, so the ring cannot leak past the region boundary.
  std::vector<char> selected(high.face_count(), 0);
  std::vector<signed char> ring_ok(high.face_count(), -1);
  Aabb hits;
  double max_hit = 0.0;
  for (Index v : region_low.vertex_ids()) {
    const SurfacePoint hit = high_index.nearest(low.vertex(v));
    hits.extend(hit.point);
    max_hit = std::max(max_hit, hit.distance());
    selected[hit.face] = 1;
    for (Index f : one_ring_faces(high, high_adj, hit.face)) {
      if (ring_ok[f] < 0)
        ring_ok[f] = lies_in(region_low, high.face_centroid(f)) ? 1 : 0;
      if (ring_ok[f]) selected[f] = 1;
    }
  }

  // Reverse projection of high vertices near the forward hits.
  std::vector<char> vertex_in(high.vertex_count(), 0);
  for (Index f = 0; f < high.face_count(); ++f)
    if (ring_ok[f] == 1)
      for (Index v : high.face(f)) vertex_in[v] = 1;
  const Aabb box = hits.inflated(options.box_inflation * hits.diagonal() + max_hit);
  for (Index v = 0; v < high.vertex_count(); ++v) {
    if (vertex_in[v]) continue;
    if (options.use_bounding_box && !box.contains(high.vertex(v))) continue;
    if (lies_in(region_low, high.vertex(v))) vertex_in[v] = 1;
  }
  for (Index f = 0; f < high.face_count(); ++f) {
    const Face& t = high.face(f);
    if (vertex_in[t[0]] && vertex_in[t[1]] && vertex_in[t[2]]) selected[f] = 1;
  }

  // Cavity filter.
  if (exclusions && !exclusions->empty()) {
    std::vector<signed char> excluded(high.vertex_count(), -1);  // -1 unknown
    auto is_excluded = [&](Index v) {
      if (excluded[v] < 0) excluded[v] = lies_in(*exclusions, high.vertex(v)) ? 1 : 0;
      return excluded[v] == 1;
    };
    for (Index f = 0; f < high.face_count(); ++f) {
      if (!selected[f]) continue;
      const Face& t = high.face(f);
      if (is_excluded(t[0]) || is_excluded(t[1]) || is_excluded(t[2])) selected[f] = 0;
    }
  }

  std::vector<Index> faces;
  for (Index f = 0; f < high.face_count(); ++f)
    if (selected[f]) faces.push_back(f);
  if (faces.empty()) return faces;

  // Largest edge-connected component.
  return std::move(connected_components(high, faces).front());
}

}  // namespace

RegionMask transfer_region(const RegionMask& region_low, const TriangleMesh& low, const TriangleMesh& high,
                           const RegionMask* exclusions, const TransferOptions& options) {
  if (region_low.empty()) fail(ErrorCode::Empty, "transfer: source region is empty");
  if (low.empty() || high.empty()) fail(ErrorCode::Empty, "transfer: empty mesh");
  const TransferContext ctx(low, high);
  // A region made of separate patches (both cheeks) keeps one component per patch.
  const auto pieces = connected_components(low, region_low.face_ids());
  std::vector<Index> faces;
  for (const auto& piece : pieces) {
    const RegionMask mask = pieces.size() == 1 ? region_low : RegionMask(low, piece);
    const std::vector<Index> got = transfer_piece(ctx, mask, exclusions, options);
    faces.insert(faces.end(), got.begin(), got.end());
  }
  if (faces.empty()) fail(ErrorCode::Empty, "transfer: the cavity filter (exclusion mask) removed every face");
  return RegionMask(high, std::move(faces));
}

double nose_crop_radius(double outer_eye_distance, double nose_length) {
  return 0.7 * (outer_eye_distance + nose_length);
}

RegionMask crop_by_nose_radius(const TriangleMesh& high, const KeypointSet& keypoints_high, const RegionMask& mask,
                               const KeypointSlots& slots) {
  const std::pair<const char*, std::size_t> needed[] = {{"nose_tip", slots.nose_tip},
                                                        {"outer_eye_left", slots.outer_eye_left},
                                                        {"outer_eye_right", slots.outer_eye_right},
                                                        {"nose_bridge", slots.nose_bridge},
                                                        {"nose_lower", slots.nose_lower}};
  std::string missing;
  for (const auto& [name, slot] : needed) {
    if (slot >= keypoints_high.size()) {
      if (!missing.empty()) missing += ", ";
      missing += std::string(name) + " (slot " + std::to_string(slot) + ")";
    }
  }
  if (!missing.empty())
    fail(ErrorCode::InvalidArgument, "nose-radius crop needs keypoint slots missing from a set of " +
                                         std::to_string(keypoints_high.size()) + ": " + missing);
  keypoints_high.validate_for(high);
  auto pos = [&](std::size_t slot) { return high.vertex(keypoints_high[slot]); };
  const double radius = nose_crop_radius((pos(slots.outer_eye_left) - pos(slots.outer_eye_right)).norm(),
                                         (pos(slots.nose_bridge) - pos(slots.nose_lower)).norm());
  const Vec3 tip = pos(slots.nose_tip);
  std::vector<Index> kept;
  for (Index f : mask.face_ids())
    if ((high.face_centroid(f) - tip).norm() <= radius) kept.push_back(f);
  if (kept.empty()) fail(ErrorCode::Empty, "nose-radius crop removed every face");
  return RegionMask(high, std::move(kept));
}

KeypointTransfer transfer_keypoints(const KeypointSet& keypoints_low, const TriangleMesh& low,
                                    const TriangleMesh& high) {
  if (high.vertex_count() == 0 || low.vertex_count() == 0) fail(ErrorCode::Empty, "keypoint transfer on an empty mesh");
  KeypointTransfer out;
  std::map<Index, std::size_t> first_at;
  for (std::size_t k = 0; k < keypoints_low.size(); ++k) {
    if (keypoints_low[k] >= low.vertex_count())
      fail(ErrorCode::InvalidArgument, "keypoint " + std::to_string(k) + " is outside the low-resolution mesh");
    const Index v = nearest_vertex(low.vertex(keypoints_low[k]), high);
    auto [it, inserted] = first_at.emplace(v, k);
    if (!inserted)
      out.warnings.push_back("keypoints " + std::to_string(it->second) + " and " + std::to_string(k) +
                             " both landed on vertex " + std::to_string(v));
    out.indices.push_back(v);
  }
  return out;
}

}  // namespace regal
