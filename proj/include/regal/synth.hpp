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

// Procedural face fixtures and region replacement for controlled
// evaluation experiments.

#include <array>
#include <string>

#include "regal/io.hpp"
#include "regal/mesh.hpp"

namespace regal {

inline const std::array<std::string, 4> kFaceRegionNames = {"nose", "mouth", "forehead", "cheek"};

/// Feature amplitudes of the procedural face, in mm. Every face generated
/// with the same grid shares one topology, so region masks and keypoint
/// indices carry over between parameter variants.
struct FaceShapeParams {
  double nose_height = 22.0;
  double nose_width = 9.0;
  double nose_tip_y = -2.0;
  double nostril = 4.0;
  double eye_depth = 8.0;
  double brow = 5.0;
  double lip = 5.0;
  double mouth_width = 22.0;
  double cheek = 6.0;
  double forehead = 5.0;
  double chin = 7.0;
};

/// Four donors, each differing from the base in one region's features
/// (0 nose, 1 mouth, 2 forehead, 3 cheek) and mildly elsewhere.
FaceShapeParams donor_face_params(int donor);

struct FaceGridOptions {
  double spacing = 2.0;  // mm between grid samples
  double half_width = 75.0;
  double half_height = 95.0;
};

struct SyntheticFace {
  TriangleMesh mesh;
  Annotations annotations;  // 68 keypoints, slots, and the four face regions
};

/// Height field z(x, y) over a regular grid, facing +z, with the nose tip
/// near the origin. Throws Error(Degenerate) if the grid is too coarse to
/// give the 68 keypoints distinct vertices.
SyntheticFace generate_face(const FaceShapeParams& params = {}, const FaceGridOptions& grid = {});

/// Region vertices take the donor's positions; vertices k rings outside the
/// region (1 <= k <= blend_rings) move by weight 1 - k / (blend_rings + 1).
/// All other vertices are copied from `base` unchanged.
TriangleMesh replace_region(const TriangleMesh& base, const TriangleMesh& donor, const RegionMask& region,
                            int blend_rings = 2);

/// Vertex-to-vertex identity map over every vertex of `mesh`.
CorrespondenceMap identity_correspondences(const TriangleMesh& mesh, std::string source_id, std::string target_id);

}  // namespace regal
