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

#include <optional>
#include <vector>

#include "regal/mesh.hpp"
#include "regal/spatial_index.hpp"
#include "regal/transform.hpp"

namespace regal {

struct IcpParams {
  int max_iters = 100;
  double tol = 1e-6;  // stop when |change of matching error| < tol (mm^2)
  /// Pairs farther apart than this (mm) are dropped from the rigid solve.
  /// Off by default.
  std::optional<double> max_distance;
};

struct IcpResult {
  SimilarityTransform transform;  // maps the moving mesh onto the fixed one
  TriangleMesh aligned_source;    // the moving mesh after `transform`
  CorrespondenceMap map;
  double final_error = 0.0;  // mm^2, nmse of `map`
  double initial_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> error_history;  // matching error after each map update
};

/// Global ICP: alternates vertex-to-point nearest neighbours from the moved
/// source onto `target` with a rigid solve over all matched pairs. The map
/// runs source -> target; `aligned_source` is the transformed source.
IcpResult gicp(const TriangleMesh& source, const TriangleMesh& target,
               const SimilarityTransform& init = SimilarityTransform::identity(), const IcpParams& params = {},
               const SpatialIndex* target_index = nullptr);

/// Region-aware ICP. Rigidly aligns the prediction so that the part of it
/// facing `gt_region` fits that region, ignoring the rest of the face.
///
/// The transform starts from a keypoint-only rigid fit. Each iteration maps
/// every region vertex of `gt_mesh` to its nearest point on the moved
/// prediction and re-solves the rigid transform over those pairs plus the
/// keypoint pairs, each keypoint weighted by |region vertices| / |keypoints|.
/// The map in the result runs region vertices -> aligned prediction, and
/// `transform`/`aligned_source` refer to the prediction.
IcpResult ricp(const TriangleMesh& pred, const RegionMask& gt_region, const TriangleMesh& gt_mesh,
               const KeypointSet& pred_keypoints, const KeypointSet& gt_keypoints, const IcpParams& params = {},
               const SpatialIndex* pred_index = nullptr);

/// Keypoint weight used by ricp.
double ricp_keypoint_weight(std::size_t region_vertex_count, std::size_t keypoint_count);

}  // namespace regal
