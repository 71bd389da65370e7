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

// Moving region masks and keypoints from a retopologised low-resolution mesh
// onto the high-resolution scan it was wrapped to. Both meshes must already
// be rigidly aligned.

#include <string>
#include <vector>

#include "regal/io.hpp"
#include "regal/mesh.hpp"

namespace regal {

struct TransferOptions {
  /// Restrict the reverse search to a box around the forward hits.
  bool use_bounding_box = true;
  /// Box inflation as a fraction of the box diagonal; the largest forward
  /// hit distance is added on top.
  double box_inflation = 0.1;
};

/// Transfers `region_low` onto `high`:
///  1. every region vertex of `low` is projected onto `high`; the hit faces
///     and their one-ring neighbours become candidates;
///  2. every `high` vertex whose nearest point on `low` lies in the region is
///     collected; faces whose corners are all collected (or candidate)
///     vertices are added;
///  3. faces touching a `high` vertex whose nearest point on `low` falls in
///     `exclusions` are dropped;
///  4. the largest edge-connected component is returned.
/// Throws Error(Empty) naming the stage that emptied the region.
RegionMask transfer_region(const RegionMask& region_low, const TriangleMesh& low, const TriangleMesh& high,
                           const RegionMask* exclusions = nullptr, const TransferOptions& options = {});

/// 0.7 * (outer-eye distance + nose bridge-to-lower-cartilage distance).
double nose_crop_radius(double outer_eye_distance, double nose_length);

/// Keeps the faces of `mask` whose centroid lies within nose_crop_radius of
/// the nose-tip keypoint. Throws Error(InvalidArgument) listing the slots the
/// keypoint set cannot supply, Error(Empty) if nothing survives.
RegionMask crop_by_nose_radius(const TriangleMesh& high, const KeypointSet& keypoints_high, const RegionMask& mask,
                               const KeypointSlots& slots = {});

struct KeypointTransfer {
  std::vector<Index> indices;         // one per input keypoint, order preserved
  std::vector<std::string> warnings;  // e.g. two keypoints on one vertex

  /// As a KeypointSet; throws if two keypoints landed on the same vertex.
  KeypointSet keypoints(std::size_t semantic_count = 0) const { return KeypointSet(indices, semantic_count); }
};

/// Each keypoint vertex of `low` goes to the nearest vertex of `high`.
KeypointTransfer transfer_keypoints(const KeypointSet& keypoints_low, const TriangleMesh& low,
                                    const TriangleMesh& high);

}  // namespace regal
