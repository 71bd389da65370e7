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

#include <string>
#include <vector>

#include <Eigen/Core>

#include "regal/mesh.hpp"
#include "regal/spatial_index.hpp"

namespace regal {

/// One stage of the non-rigid schedule. The stiffness weight starts at
/// `stiffness_weight` and is multiplied by `decay_factor` after each of the
/// `steps` stiffness steps.
struct NicpStage {
  double distance_weight = 1.0;
  double landmark_weight = 5.0;
  double stiffness_weight = 50.0;
  double decay_factor = 0.5;
  int steps = 4;
};

struct NicpSchedule {
  std::vector<NicpStage> stages;
  double tol = 1e-3;        // stop a step's inner loop when max vertex movement < tol (mm)
  int max_inner_iters = 20; // correspondence updates per stiffness step
  double skew_weight = 1.0; // weight of the translation column in the stiffness term

  /// Stage 1: landmark 50, stiffness 150, no distance term.
  /// Stage 2: distance 1, landmark 5, stiffness 50.
  /// Both decay by 0.5 over 4 steps.
  static NicpSchedule two_stage_default();

  void validate() const;
};

struct LandmarkPairs {
  std::vector<Index> source_vertices;  // indices into the deforming mesh
  std::vector<Vec3> target_points;
};

/// Per-solve record: objective of the previous solution and of the new one,
/// both evaluated with the correspondences and weights used by the solve.
struct NicpSolveLog {
  int stage = 0;
  int step = 0;
  int inner = 0;
  double stiffness = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double max_movement = 0.0;
};

using Affine34 = Eigen::Matrix<double, 3, 4>;

struct DeformationState {
  std::vector<Affine34> transforms;  // deformed_i = transforms[i] * [rest_i; 1]
  std::vector<Vec3> rest;
  std::vector<Vec3> deformed;
  std::vector<NicpSolveLog> log;
  std::vector<std::string> notes;  // e.g. skipped stages
};

/// Non-rigid ICP with a per-vertex affine model. Each stiffness step solves
///   w_d sum |X_i v_i - proj(X_i v_i)|^2 + w_l sum |X_k v_k - l_k|^2
///   + w_s sum_edges |G (X_i - X_j)|_F^2
/// as a sparse linear least-squares problem, re-projecting the deformed
/// vertices onto `target` between solves. Rest positions are expressed
/// relative to the source centroid so the energy is translation invariant.
///
/// A stage without distance term is skipped (with a note) when its
/// landmarks cannot pin an affine transform on every connected component.
/// Throws Error(Singular) when the normal equations are singular and
/// Error(Numeric) on a non-finite solve; messages carry stage/step.
DeformationState nicp_deform(const TriangleMesh& source, const TriangleMesh& target, const LandmarkPairs& landmarks,
                             const NicpSchedule& schedule, const SpatialIndex* target_index = nullptr);

/// Evaluates the nICP objective for given per-vertex transforms (in the
/// frame of `rest`), correspondences and weights. Exposed for testing.
double nicp_objective(const TriangleMesh& source, const std::vector<Affine34>& transforms,
                      const std::vector<Vec3>& correspondences, const LandmarkPairs& landmarks, double distance_weight,
                      double landmark_weight, double stiffness_weight, double skew_weight);

}  // namespace regal
