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

#include "regal/nicp.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "regal/topology.hpp"

namespace regal {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector4d;
using SpMat = Eigen::SparseMatrix<double>;

std::string where(int stage, int step) {
  return "stage " + std::to_string(stage + 1) + ", step " + std::to_string(step + 1);
}

// Problem data in the centroid-relative frame. Unknown X is 4n x 3; rows
// 4i..4i+3 hold vertex i's transform, deformed_i^T = x_i^T X_i.
struct Problem {
  std::size_t n = 0;
  Vec3 centroid = Vec3::Zero();
  std::vector<Vector4d> x;
  std::vector<std::pair<Index, Index>> edges;
  Vector4d g2 = Vector4d::Ones();  // squared diagonal of G

  Vec3 deformed(const MatrixXd& X, std::size_t i) const {
    return X.middleRows<4>(4 * i).transpose() * x[i];
  }
};

Problem make_problem(const TriangleMesh& source, double skew_weight) {
  Problem p;
  p.n = source.vertex_count();
  for (const Vec3& v : source.vertices()) p.centroid += v;
  p.centroid /= static_cast<double>(p.n);
  p.x.reserve(p.n);
  for (const Vec3& v : source.vertices()) {
    Vector4d h;
    h << v - p.centroid, 1.0;
    p.x.push_back(h);
  }
  p.edges = mesh_edges(source);
  p.g2(3) = skew_weight * skew_weight;
  return p;
}

double objective(const Problem& p, const MatrixXd& X, const std::vector<Vec3>& corr, const LandmarkPairs& lm,
                 double wd, double wl, double ws) {
  double e = 0.0;
  for (const auto& [i, j] : p.edges) {
    const Eigen::Matrix<double, 4, 3> d = X.middleRows<4>(4 * i) - X.middleRows<4>(4 * j);
    e += ws * (p.g2.asDiagonal() * d.cwiseAbs2()).sum();
  }
  if (wd > 0.0)
    for (std::size_t i = 0; i < p.n; ++i) e += wd * (p.deformed(X, i) - corr[i]).squaredNorm();
  if (wl > 0.0)
    for (std::size_t k = 0; k < lm.source_vertices.size(); ++k)
      e += wl * (p.deformed(X, lm.source_vertices[k]) - lm.target_points[k]).squaredNorm();
  return e;
}

// Every connected component must hold landmarks spanning an affine frame
// (4 points, not coplanar) for a landmark-only solve to be well posed.
bool landmarks_pin_components(const TriangleMesh& source, const Problem& p, const LandmarkPairs& lm) {
  std::vector<Index> parent(p.n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& [i, j] : p.edges) parent[find(i)] = find(j);
  std::vector<std::vector<Index>> per_root(p.n);
  for (Index k : lm.source_vertices) per_root[find(k)].push_back(k);
  for (Index v = 0; v < p.n; ++v) {
    if (find(v) != v) continue;
    const auto& ks = per_root[v];
    if (ks.size() < 4) return false;
    Eigen::MatrixXd m(ks.size(), 4);
    for (std::size_t r = 0; r < ks.size(); ++r) m.row(r) = p.x[ks[r]].transpose();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s(3) <= 1e-9 * s(0)) return false;
  }
  (void)source;
  return true;
}

}  // namespace

NicpSchedule NicpSchedule::two_stage_default() {
  NicpSchedule s;
  s.stages.push_back({0.0, 50.0, 150.0, 0.5, 4});
  s.stages.push_back({1.0, 5.0, 50.0, 0.5, 4});
  return s;
}

void NicpSchedule::validate() const {
  if (stages.empty()) fail(ErrorCode::InvalidArgument, "nICP schedule has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const NicpStage& s = stages[i];
    const std::string tag = "nICP stage " + std::to_string(i + 1) + ": ";
    if (!(s.distance_weight >= 0.0) || !(s.landmark_weight >= 0.0))
      fail(ErrorCode::InvalidArgument, tag + "weights must be non-negative");
    if (!(s.stiffness_weight > 0.0)) fail(ErrorCode::InvalidArgument, tag + "stiffness weight must be positive");
    if (!(s.decay_factor > 0.0 && s.decay_factor <= 1.0))
      fail(ErrorCode::InvalidArgument, tag + "decay factor must lie in (0, 1]");
    if (s.steps < 1) fail(ErrorCode::InvalidArgument, tag + "needs at least one step");
  }
  if (!(tol >= 0.0)) fail(ErrorCode::InvalidArgument, "nICP tolerance must be non-negative");
  if (max_inner_iters < 1) fail(ErrorCode::InvalidArgument, "nICP needs at least one inner iteration");
  if (!(skew_weight > 0.0)) fail(ErrorCode::InvalidArgument, "nICP skew weight must be positive");
}

double nicp_objective(const TriangleMesh& source, const std::vector<Affine34>& transforms,
                      const std::vector<Vec3>& correspondences, const LandmarkPairs& landmarks, double distance_weight,
                      double landmark_weight, double stiffness_weight, double skew_weight) {
  const Problem p = make_problem(source, skew_weight);
  if (transforms.size() != p.n) fail(ErrorCode::InvalidArgument, "transform count differs from vertex count");
  MatrixXd X(4 * p.n, 3);
  for (std::size_t i = 0; i < p.n; ++i) {
    const Eigen::Matrix3d a = transforms[i].leftCols<3>();
    const Vec3 b = transforms[i].col(3) + a * p.centroid;
    X.middleRows<3>(4 * i) = a.transpose();
    X.row(4 * i + 3) = b.transpose();
  }
  return objective(p, X, correspondences, landmarks, distance_weight, landmark_weight, stiffness_weight);
}

DeformationState nicp_deform(const TriangleMesh& source, const TriangleMesh& target, const LandmarkPairs& landmarks,
                             const NicpSchedule& schedule, const SpatialIndex* target_index) {
  schedule.validate();
  if (source.vertex_count() == 0) fail(ErrorCode::Empty, "nICP source mesh is empty");
  if (target.empty()) fail(ErrorCode::Empty, "nICP target mesh is empty");
  if (landmarks.source_vertices.size() != landmarks.target_points.size())
    fail(ErrorCode::InvalidArgument, "nICP landmark lists differ in length");
  for (Index k : landmarks.source_vertices)
    if (k >= source.vertex_count())
      fail(ErrorCode::InvalidArgument, "nICP landmark references vertex " + std::to_string(k) + " out of range");

  std::optional<SpatialIndex> own;
  if (!target_index) target_index = &own.emplace(target);

  const Problem p = make_problem(source, schedule.skew_weight);
  {
    std::vector<char> touched(p.n, 0);
    for (const auto& [i, j] : p.edges) touched[i] = touched[j] = 1;
    for (std::size_t i = 0; i < p.n; ++i)
      if (!touched[i])
        fail(ErrorCode::Singular, "nICP system is singular: vertex " + std::to_string(i) +
                                      " has no incident edge, so its transform is unconstrained");
  }
  const bool landmarks_pin = landmarks_pin_components(source, p, landmarks);

  DeformationState state;
  state.rest = source.vertices();
  MatrixXd X(4 * p.n, 3);
  for (std::size_t i = 0; i < p.n; ++i) {
    X.middleRows<3>(4 * i).setIdentity();
    X.row(4 * i + 3) = p.centroid.transpose();
  }

  std::vector<Vec3> deformed(p.n), corr(p.n);
  for (std::size_t i = 0; i < p.n; ++i) deformed[i] = p.deformed(X, i);

  Eigen::SimplicialLDLT<SpMat> solver;
  for (std::size_t si = 0; si < schedule.stages.size(); ++si) {
    const NicpStage& stage = schedule.stages[si];
    const int s_idx = static_cast<int>(si);
    const double wd = stage.distance_weight;
    const double wl = landmarks.source_vertices.empty() ? 0.0 : stage.landmark_weight;
    if (wd == 0.0 && !landmarks_pin) {
      state.notes.push_back("stage " + std::to_string(si + 1) +
                            " skipped: landmarks do not determine an affine transform on every component");
      continue;
    }
    double ws = stage.stiffness_weight;
    for (int step = 0; step < stage.steps; ++step, ws *= stage.decay_factor) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(p.edges.size() * 16 + p.n * 16);
      for (const auto& [i, j] : p.edges) {
        for (int r = 0; r < 4; ++r) {
          const double g = ws * p.g2(r);
          const int a = 4 * static_cast<int>(i) + r, b = 4 * static_cast<int>(j) + r;
          trip.emplace_back(a, a, g);
          trip.emplace_back(b, b, g);
          trip.emplace_back(a, b, -g);
          trip.emplace_back(b, a, -g);
        }
      }
      auto add_outer = [&](std::size_t i, double w) {
        const Eigen::Matrix4d m = w * p.x[i] * p.x[i].transpose();
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) trip.emplace_back(4 * i + r, 4 * i + c, m(r, c));
      };
      if (wd > 0.0)
        for (std::size_t i = 0; i < p.n; ++i) add_outer(i, wd);
      if (wl > 0.0)
        for (Index k : landmarks.source_vertices) add_outer(k, wl);
      SpMat normal(4 * p.n, 4 * p.n);
      normal.setFromTriplets(trip.begin(), trip.end());
      solver.compute(normal);
      if (solver.info() != Eigen::Success)
        fail(ErrorCode::Singular, "nICP factorization failed at " + where(s_idx, step));
      const auto d = solver.vectorD();
      if (!(d.minCoeff() > 1e-14 * d.cwiseAbs().maxCoeff()))
        fail(ErrorCode::Singular, "nICP system is singular at " + where(s_idx, step));

      MatrixXd rhs_landmarks = MatrixXd::Zero(4 * p.n, 3);
      if (wl > 0.0)
        for (std::size_t k = 0; k < landmarks.source_vertices.size(); ++k) {
          const Index i = landmarks.source_vertices[k];
          rhs_landmarks.middleRows<4>(4 * i) += wl * p.x[i] * landmarks.target_points[k].transpose();
        }

      const int inner_limit = wd > 0.0 ? schedule.max_inner_iters : 1;
      for (int inner = 0; inner < inner_limit; ++inner) {
        MatrixXd rhs = rhs_landmarks;
        if (wd > 0.0) {
          for (std::size_t i = 0; i < p.n; ++i) {
            corr[i] = target_index->nearest(deformed[i]).point;
            rhs.middleRows<4>(4 * i) += wd * p.x[i] * corr[i].transpose();
          }
        }
        NicpSolveLog entry;
        entry.stage = s_idx;
        entry.step = step;
        entry.inner = inner;
        entry.stiffness = ws;
        entry.objective_before = objective(p, X, corr, landmarks, wd, wl, ws);
        MatrixXd next = solver.solve(rhs);
        if (!next.allFinite()) fail(ErrorCode::Numeric, "nICP produced a non-finite solution at " + where(s_idx, step));
        X = std::move(next);
        double movement = 0.0;
        for (std::size_t i = 0; i < p.n; ++i) {
          const Vec3 q = p.deformed(X, i);
          movement = std::max(movement, (q - deformed[i]).norm());
          deformed[i] = q;
        }
        entry.objective_after = objective(p, X, corr, landmarks, wd, wl, ws);
        entry.max_movement = movement;
        state.log.push_back(entry);
        if (movement < schedule.tol) break;
      }
    }
  }

  state.transforms.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const Eigen::Matrix3d a = X.middleRows<3>(4 * i).transpose();
    const Vec3 b = X.row(4 * i + 3).transpose();
    state.transforms[i].leftCols<3>() = a;
    state.transforms[i].col(3) = b - a * p.centroid;
  }
  state.deformed = std::move(deformed);
  return state;
}

}  // namespace regal
