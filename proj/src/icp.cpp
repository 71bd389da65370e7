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

#include "regal/icp.hpp"

#include <cmath>

#include "regal/metric.hpp"

namespace regal {
namespace {

struct Matches {
  std::vector<Index> source_ids;
  std::vector<SurfacePoint> hits;
  double error = 0.0;  // mean squared distance over accepted pairs
};

void check_params(const IcpParams& p) {
  if (p.max_iters < 1) fail(ErrorCode::InvalidArgument, "ICP max_iters must be >= 1");
  if (!(p.tol >= 0.0)) fail(ErrorCode::InvalidArgument, "ICP tolerance must be non-negative");
  if (p.max_distance && !(*p.max_distance > 0.0)) fail(ErrorCode::InvalidArgument, "ICP max_distance must be positive");
}

// Nearest points on the (fixed) indexed mesh for `query` points.
Matches match(std::span<const Index> ids, std::span<const Vec3> query, const SpatialIndex& index,
              const IcpParams& params) {
  Matches m;
  m.source_ids.reserve(ids.size());
  m.hits.reserve(ids.size());
  const double cap2 = params.max_distance ? *params.max_distance * *params.max_distance
                                          : std::numeric_limits<double>::infinity();
  double sq = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    SurfacePoint hit = index.nearest(query[i]);
    if (hit.squared_distance > cap2) continue;
    sq += hit.squared_distance;
    m.source_ids.push_back(ids[i]);
    m.hits.push_back(hit);
  }
  if (m.hits.size() < 3) fail(ErrorCode::Degenerate, "ICP: fewer than 3 correspondences survived the distance cap");
  m.error = sq / static_cast<double>(m.hits.size());
  return m;
}

CorrespondenceMap to_map(const Matches& m, const char* source_id, const char* target_id) {
  CorrespondenceMap map(MapKind::VertexToPoint, source_id, target_id);
  map.reserve(m.hits.size());
  for (std::size_t i = 0; i < m.hits.size(); ++i) map.add_point(m.source_ids[i], m.hits[i].face, m.hits[i].bary);
  return map;
}

}  // namespace

IcpResult gicp(const TriangleMesh& source, const TriangleMesh& target, const SimilarityTransform& init,
               const IcpParams& params, const SpatialIndex* target_index) {
  check_params(params);
  if (source.vertex_count() == 0 || target.empty()) fail(ErrorCode::Empty, "gICP on an empty mesh");
  std::optional<SpatialIndex> own;
  if (!target_index) target_index = &own.emplace(target);

  std::vector<Index> ids(source.vertex_count());
  for (Index i = 0; i < ids.size(); ++i) ids[i] = i;

  SimilarityTransform t = init;
  t.scale = 1.0;
  auto moved = t.apply(std::span<const Vec3>(source.vertices()));
  Matches m = match(ids, moved, *target_index, params);

  IcpResult r;
  r.initial_error = m.error;
  r.error_history.push_back(m.error);
  double prev = m.error;
  for (int it = 1; it <= params.max_iters; ++it) {
    std::vector<Vec3> src, dst;
    src.reserve(m.hits.size());
    dst.reserve(m.hits.size());
    for (std::size_t i = 0; i < m.hits.size(); ++i) {
      src.push_back(source.vertex(m.source_ids[i]));
      dst.push_back(m.hits[i].point);
    }
    t = solve_similarity(src, dst, {}, false);
    moved = t.apply(std::span<const Vec3>(source.vertices()));
    m = match(ids, moved, *target_index, params);
    r.error_history.push_back(m.error);
    r.iterations = it;
    if (std::abs(prev - m.error) < params.tol) {
      r.converged = true;
      break;
    }
    prev = m.error;
  }
  r.transform = t;
  r.aligned_source = source.with_vertices(std::move(moved));
  r.map = to_map(m, "source", "target");
  r.final_error = nmse(r.aligned_source, r.map, target);
  return r;
}

double ricp_keypoint_weight(std::size_t region_vertex_count, std::size_t keypoint_count) {
  if (keypoint_count == 0) fail(ErrorCode::InvalidArgument, "rICP needs keypoints");
  return static_cast<double>(region_vertex_count) / static_cast<double>(keypoint_count);
}

IcpResult ricp(const TriangleMesh& pred, const RegionMask& gt_region, const TriangleMesh& gt_mesh,
               const KeypointSet& pred_keypoints, const KeypointSet& gt_keypoints, const IcpParams& params,
               const SpatialIndex* pred_index) {
  check_params(params);
  if (gt_region.empty()) fail(ErrorCode::Empty, "rICP region is empty");
  if (pred_keypoints.size() != gt_keypoints.size())
    fail(ErrorCode::InvalidArgument, "rICP keypoint counts differ: prediction has " +
                                         std::to_string(pred_keypoints.size()) + ", ground truth has " +
                                         std::to_string(gt_keypoints.size()));
  if (pred.empty()) fail(ErrorCode::Empty, "rICP prediction mesh is empty");
  std::optional<SpatialIndex> own;
  if (!pred_index) pred_index = &own.emplace(pred);

  const std::vector<Vec3> kp_pred = pred_keypoints.positions(pred);
  const std::vector<Vec3> kp_gt = gt_keypoints.positions(gt_mesh);
  const std::vector<Index>& region = gt_region.vertex_ids();
  const double w_k = ricp_keypoint_weight(region.size(), kp_pred.size());

  std::vector<Vec3> region_pts;
  region_pts.reserve(region.size());
  for (Index v : region) region_pts.push_back(gt_mesh.vertex(v));

  SimilarityTransform t = solve_similarity(kp_pred, kp_gt, {}, false);

  // Nearest point on T(pred) to h equals T of the nearest point on pred to
  // T^-1(h), since T is rigid; queries run in the prediction's own frame.
  auto match_region = [&](const SimilarityTransform& tr) {
    const SimilarityTransform inv = tr.inverse();
    return match(region, inv.apply(std::span<const Vec3>(region_pts)), *pred_index, params);
  };

  Matches m = match_region(t);
  IcpResult r;
  r.initial_error = m.error;
  r.error_history.push_back(m.error);

  std::vector<double> weights;
  double prev = m.error;
  for (int it = 1; it <= params.max_iters; ++it) {
    std::vector<Vec3> src, dst;
    src.reserve(m.hits.size() + kp_pred.size());
    dst.reserve(m.hits.size() + kp_pred.size());
    weights.assign(m.hits.size(), 1.0);
    for (std::size_t i = 0; i < m.hits.size(); ++i) {
      src.push_back(m.hits[i].point);
      dst.push_back(gt_mesh.vertex(m.source_ids[i]));
    }
    for (std::size_t k = 0; k < kp_pred.size(); ++k) {
      src.push_back(kp_pred[k]);
      dst.push_back(kp_gt[k]);
      weights.push_back(w_k);
    }
    t = solve_similarity(src, dst, weights, false);
    m = match_region(t);
    r.error_history.push_back(m.error);
    r.iterations = it;
    if (std::abs(prev - m.error) < params.tol) {
      r.converged = true;
      break;
    }
    prev = m.error;
  }
  r.transform = t;
  r.aligned_source = t.apply(pred);
  r.map = to_map(m, "gt_region", "pred_aligned");
  r.final_error = nmse(gt_mesh, r.map, r.aligned_source);
  return r;
}

}  // namespace regal
