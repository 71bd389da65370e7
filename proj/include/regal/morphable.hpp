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

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "regal/mesh.hpp"

namespace regal {

/// Linear shape model: shape = mean + components * alpha, with shapes
/// flattened as (x0, y0, z0, x1, ...).
struct MorphableBasis {
  Eigen::VectorXd mean;        // 3n
  Eigen::MatrixXd components;  // 3n x k, orthonormal columns
  Eigen::VectorXd variances;   // k, descending, > 0
  std::vector<Face> faces;
  double total_variance = 0.0;  // of the training corpus

  std::size_t vertex_count() const { return static_cast<std::size_t>(mean.size() / 3); }
  std::size_t component_count() const { return static_cast<std::size_t>(components.cols()); }

  void validate(double tol = 1e-9) const;
};

inline constexpr double kDefaultVarianceCutoff = 0.999;

/// PCA over a corpus of meshes sharing one topology. Keeps the smallest
/// number of components whose cumulative explained variance reaches
/// `cumulative_variance_cutoff`. Variances use the (m - 1) divisor.
/// Throws Error(TopologyMismatch) naming the offending mesh, and
/// Error(Degenerate) when the corpus has zero variance.
MorphableBasis pca_build(std::span<const TriangleMesh> corpus, double cumulative_variance_cutoff = kDefaultVarianceCutoff);

/// mean + components * alpha; shorter alpha is zero-padded.
TriangleMesh reconstruct(const MorphableBasis& basis, const Eigen::VectorXd& alpha);

/// argmin |mean + Phi alpha - target|^2 + weight |alpha|^2 in closed form.
Eigen::VectorXd fit_to_mesh(const MorphableBasis& basis, const TriangleMesh& target, double reg_weight);

/// Same objective restricted to the listed vertices and target points.
Eigen::VectorXd fit_to_points(const MorphableBasis& basis, std::span<const Index> vertices,
                              std::span<const Vec3> targets, double reg_weight);

Eigen::VectorXd flatten(const TriangleMesh& mesh);

/// Binary container, little-endian:
///   char[8] "REGALPCA", u32 version (1), u32 reserved,
///   u64 n_vertices, u64 n_components, u64 n_faces,
///   f64 total_variance,
///   f64 mean[3n], f64 components[3n * k] (column-major),
///   f64 variances[k], u32 faces[3 * n_faces]
void save_basis(const MorphableBasis& basis, const std::filesystem::path& path);
MorphableBasis load_basis(const std::filesystem::path& path);

}  // namespace regal
