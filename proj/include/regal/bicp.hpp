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

// Region-aware, bidirectional evaluation: rigid region alignment followed by
// non-rigid deformation of the ground-truth region onto the aligned
// prediction, and per-region error reporting.

#include <string>
#include <utility>
#include <vector>

#include "regal/icp.hpp"
#include "regal/metric.hpp"
#include "regal/nicp.hpp"

namespace regal {

struct RegionReport {
  std::string name;
  ErrorStats stats;
  std::vector<Index> vertex_ids;     // ground-truth vertices, ascending
  std::vector<double> vertex_errors; // mm, aligned with vertex_ids

  /// Throws unless `stats` can be recomputed from `vertex_errors` within tol.
  void validate(double tol = 1e-9) const;
};

RegionReport make_region_report(std::string name, std::vector<Index> vertex_ids, std::vector<double> vertex_errors);

/// Maps each region vertex to the surface point of `pred_aligned` nearest
/// to its deformed position. `deformed` must come from nicp_deform on
/// extract_submesh(gt, region.face_ids()), whose local vertex order is
/// region.vertex_ids().
CorrespondenceMap induce_correspondences(const DeformationState& deformed, const RegionMask& region,
                                         const TriangleMesh& pred_aligned, const SpatialIndex* pred_index = nullptr);

/// Keypoints whose ground-truth vertex belongs to `region`, as local
/// submesh indices paired with the aligned prediction's keypoint positions.
LandmarkPairs region_landmarks(const RegionMask& region, const KeypointSet& gt_keypoints,
                               const std::vector<Vec3>& pred_keypoints_aligned);

struct NamedRegion {
  std::string name;
  RegionMask mask;
};

struct RegionEvaluation {
  RegionReport report;
  IcpResult alignment;            // rICP of the prediction onto this region
  CorrespondenceMap induced;      // region vertices -> aligned prediction
  std::vector<Vec3> deformed;     // deformed region vertices, order of report.vertex_ids
  std::vector<std::string> notes;
};

struct BicpResult {
  std::vector<RegionEvaluation> regions;
  RegionReport pooled;      // "all": per-vertex errors of every region pooled
  ErrorStats region_mean;   // "all": unweighted mean of the per-region statistics
};

/// Full evaluation of `pred` against `gt` on each named region. Errors from
/// the rigid or non-rigid stage are rethrown with the region name attached.
BicpResult bicp_evaluate(const TriangleMesh& pred, const TriangleMesh& gt, const std::vector<NamedRegion>& regions,
                         const KeypointSet& pred_keypoints, const KeypointSet& gt_keypoints,
                         const NicpSchedule& schedule = NicpSchedule::two_stage_default(),
                         const IcpParams& ricp_params = {});

/// Evaluation of one region; building block of bicp_evaluate.
RegionEvaluation bicp_evaluate_region(const TriangleMesh& pred, const SpatialIndex& pred_index, const TriangleMesh& gt,
                                      const NamedRegion& region, const KeypointSet& pred_keypoints,
                                      const KeypointSet& gt_keypoints, const NicpSchedule& schedule,
                                      const IcpParams& ricp_params);

}  // namespace regal
