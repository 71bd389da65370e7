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

#include "regal/bicp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "regal/topology.hpp"

namespace regal {

void RegionReport::validate(double tol) const {
  if (vertex_ids.size() != vertex_errors.size())
    fail(ErrorCode::InvalidArgument, "region report '" + name + "': vertex and error lists differ in length");
  const ErrorStats s = stats_from_distances(vertex_errors);
  auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };
  if (s.count != stats.count || !close(s.nmse_mm2, stats.nmse_mm2) || !close(s.rms_mm, stats.rms_mm) ||
      !close(s.mean_mm, stats.mean_mm))
    fail(ErrorCode::InvalidArgument, "region report '" + name + "': statistics do not match per-vertex errors");
}

RegionReport make_region_report(std::string name, std::vector<Index> vertex_ids, std::vector<double> vertex_errors) {
  RegionReport r;
  r.name = std::move(name);
  r.stats = stats_from_distances(vertex_errors);
  r.vertex_ids = std::move(vertex_ids);
  r.vertex_errors = std::move(vertex_errors);
  return r;
}

CorrespondenceMap induce_correspondences(const DeformationState& deformed, const RegionMask& region,
                                         const TriangleMesh& pred_aligned, const SpatialIndex* pred_index) {
  if (pred_aligned.empty()) fail(ErrorCode::Empty, "cannot induce correspondences onto an empty prediction");
  const auto& ids = region.vertex_ids();
  if (deformed.deformed.size() != ids.size())
    fail(ErrorCode::InvalidArgument, "deformation covers " + std::to_string(deformed.deformed.size()) +
                                         " vertices, region has " + std::to_string(ids.size()));
  std::optional<SpatialIndex> own;
  if (!pred_index) pred_index = &own.emplace(pred_aligned);
  CorrespondenceMap map(MapKind::VertexToPoint, "gt_region", "pred_aligned");
  map.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const SurfacePoint hit = nearest_surface_point(deformed.deformed[i], pred_aligned, *pred_index);
    map.add_point(ids[i], hit.face, hit.bary);
  }
  return map;
}

LandmarkPairs region_landmarks(const RegionMask& region, const KeypointSet& gt_keypoints,
                               const std::vector<Vec3>& pred_keypoints_aligned) {
  LandmarkPairs lm;
  const auto& ids = region.vertex_ids();
  for (std::size_t k = 0; k < gt_keypoints.size(); ++k) {
    auto it = std::lower_bound(ids.begin(), ids.end(), gt_keypoints[k]);
    if (it == ids.end() || *it != gt_keypoints[k]) continue;
    lm.source_vertices.push_back(static_cast<Index>(it - ids.begin()));
    lm.target_points.push_back(pred_keypoints_aligned.at(k));
  }
  return lm;
}

RegionEvaluation bicp_evaluate_region(const TriangleMesh& pred, const SpatialIndex& pred_index, const TriangleMesh& gt,
                                      const NamedRegion& region, const KeypointSet& pred_keypoints,
                                      const KeypointSet& gt_keypoints, const NicpSchedule& schedule,
                                      const IcpParams& ricp_params) {
  try {
    RegionEvaluation ev;
    ev.alignment = ricp(pred, region.mask, gt, pred_keypoints, gt_keypoints, ricp_params, &pred_index);
    const TriangleMesh& aligned = ev.alignment.aligned_source;
    const SpatialIndex aligned_index(aligned);

    const Submesh sub = extract_submesh(gt, region.mask.face_ids());
    const std::vector<Vec3> kp_aligned = pred_keypoints.positions(aligned);
    const LandmarkPairs lm = region_landmarks(region.mask, gt_keypoints, kp_aligned);
    const DeformationState state = nicp_deform(sub.mesh, aligned, lm, schedule, &aligned_index);

    ev.induced = induce_correspondences(state, region.mask, aligned, &aligned_index);
    ev.report = make_region_report(region.name, region.mask.vertex_ids(), correspondence_distances(gt, ev.induced, aligned));
    ev.deformed = state.deformed;
    ev.notes = state.notes;
    return ev;
  } catch (const Error& e) {
    throw Error(e.code(), "region '" + region.name + "': " + e.what());
  }
}

BicpResult bicp_evaluate(const TriangleMesh& pred, const TriangleMesh& gt, const std::vector<NamedRegion>& regions,
                         const KeypointSet& pred_keypoints, const KeypointSet& gt_keypoints,
                         const NicpSchedule& schedule, const IcpParams& ricp_params) {
  if (regions.empty()) fail(ErrorCode::InvalidArgument, "bICP needs at least one region");
  if (pred.empty()) fail(ErrorCode::Empty, "bICP prediction mesh is empty");
  const SpatialIndex pred_index(pred);
  BicpResult out;
  std::vector<Index> pooled_ids;
  std::vector<double> pooled_err;
  ErrorStats mean;
  for (const NamedRegion& r : regions) {
    out.regions.push_back(
        bicp_evaluate_region(pred, pred_index, gt, r, pred_keypoints, gt_keypoints, schedule, ricp_params));
    const RegionReport& rep = out.regions.back().report;
    pooled_ids.insert(pooled_ids.end(), rep.vertex_ids.begin(), rep.vertex_ids.end());
    pooled_err.insert(pooled_err.end(), rep.vertex_errors.begin(), rep.vertex_errors.end());
    mean.nmse_mm2 += rep.stats.nmse_mm2;
    mean.rms_mm += rep.stats.rms_mm;
    mean.mean_mm += rep.stats.mean_mm;
    mean.count += rep.stats.count;
  }
  const auto k = static_cast<double>(regions.size());
  mean.nmse_mm2 /= k;
  mean.rms_mm /= k;
  mean.mean_mm /= k;
  out.region_mean = mean;
  out.pooled = make_region_report("all", std::move(pooled_ids), std::move(pooled_err));
  return out;
}

}  // namespace regal
