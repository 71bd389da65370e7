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

#include "regal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "regal/topology.hpp"

namespace regal {
namespace {

double gauss(double dx, double dy, double sx, double sy) {
  return std::exp(-0.5 * (dx * dx / (sx * sx) + dy * dy / (sy * sy)));
}

double nose_profile(double y, double tip_y) {
  constexpr double kBridgeTop = 32.0;
  if (y > kBridgeTop) return 0.25 * std::exp(-0.5 * (y - kBridgeTop) * (y - kBridgeTop) / 36.0);
  if (y < tip_y) return std::exp(-0.5 * (y - tip_y) * (y - tip_y) / 25.0);
  const double t = (kBridgeTop - y) / (kBridgeTop - tip_y);
  return 0.25 + 0.75 * t * t;
}

double height(const FaceShapeParams& p, double x, double y) {
  double z = -x * x / 220.0 - y * y / 320.0;
  const double t = std::clamp((32.0 - y) / (32.0 - p.nose_tip_y), 0.0, 1.0);
  const double w = p.nose_width * (0.55 + 0.45 * t);
  z += p.nose_height * std::exp(-0.5 * x * x / (w * w)) * nose_profile(y, p.nose_tip_y);
  const double ny = y - p.nose_tip_y + 8.0;
  z += p.nostril * (gauss(x - 12.0, ny, 5.0, 4.0) + gauss(x + 12.0, ny, 5.0, 4.0));
  z -= p.eye_depth * (gauss(x + 32.0, y - 35.0, 11.0, 7.0) + gauss(x - 32.0, y - 35.0, 11.0, 7.0));
  z += p.brow * (gauss(x + 30.0, y - 50.0, 16.0, 5.0) + gauss(x - 30.0, y - 50.0, 16.0, 5.0));
  z += p.lip * (gauss(x, y + 36.0, p.mouth_width, 3.5) + 0.9 * gauss(x, y + 45.0, 0.9 * p.mouth_width, 4.0));
  z -= 0.6 * p.lip * gauss(x, y + 40.0, p.mouth_width, 1.5);
  z += p.cheek * (gauss(x + 46.0, y + 2.0, 15.0, 16.0) + gauss(x - 46.0, y + 2.0, 15.0, 16.0));
  z += p.forehead * gauss(x, y - 75.0, 35.0, 18.0);
  z += p.chin * gauss(x, y + 78.0, 18.0, 9.0);
  return z;
}

// iBUG-68 layout on the face plane (mm).
std::vector<std::array<double, 2>> keypoint_layout() {
  std::vector<std::array<double, 2>> kp;
  const double pi = std::numbers::pi;
  for (int i = 0; i <= 16; ++i) {
    const double t = pi * i / 16.0;
    kp.push_back({-68.0 * std::cos(t), 20.0 - 100.0 * std::sin(t)});
  }
  const double brow_y[5] = {48.0, 51.0, 52.0, 51.0, 48.0};
  for (int i = 0; i < 5; ++i) kp.push_back({-54.0 + 9.0 * i, brow_y[i]});
  for (int i = 0; i < 5; ++i) kp.push_back({18.0 + 9.0 * i, brow_y[4 - i]});
  for (double y : {32.0, 22.0, 12.0, -2.0}) kp.push_back({0.0, y});
  for (int i = 0; i < 5; ++i) kp.push_back({-12.0 + 6.0 * i, -12.0});
  const double eye[6][2] = {{-12, 0}, {-4, 4}, {4, 4}, {12, 0}, {4, -4}, {-4, -4}};
  for (const auto& e : eye) kp.push_back({-32.0 + e[0], 35.0 + e[1]});
  for (const auto& e : eye) kp.push_back({32.0 + e[0], 35.0 + e[1]});
  for (int k = 0; k < 12; ++k) {
    const double a = pi - k * pi / 6.0;
    kp.push_back({24.0 * std::cos(a), -40.0 + 9.0 * std::sin(a)});
  }
  for (int k = 0; k < 8; ++k) {
    const double a = pi - k * pi / 4.0;
    kp.push_back({16.0 * std::cos(a), -40.0 + 3.0 * std::sin(a)});
  }
  return kp;
}

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double u = (x - cx) / rx, v = (y - cy) / ry;
  return u * u + v * v <= 1.0;
}

}  // namespace

FaceShapeParams donor_face_params(int donor) {
  FaceShapeParams p;
  p.chin += 2.0;
  switch (donor) {
    case 0:
      p.nose_height = 29.0;
      p.nose_width = 11.5;
      p.nose_tip_y = -6.0;
      p.nostril = 6.0;
      break;
    case 1:
      p.lip = 8.5;
      p.mouth_width = 27.0;
      break;
    case 2:
      p.forehead = 12.0;
      break;
    case 3:
      p.cheek = 12.0;
      break;
    default:
      fail(ErrorCode::InvalidArgument, "donor index must be 0..3, got " + std::to_string(donor));
  }
  return p;
}

SyntheticFace generate_face(const FaceShapeParams& params, const FaceGridOptions& grid) {
  if (!(grid.spacing > 0.0) || !(grid.half_width > grid.spacing) || !(grid.half_height > grid.spacing))
    fail(ErrorCode::InvalidArgument, "face grid spacing and extent must be positive");
  const int nx = static_cast<int>(std::floor(2.0 * grid.half_width / grid.spacing)) + 1;
  const int ny = static_cast<int>(std::floor(2.0 * grid.half_height / grid.spacing)) + 1;
  const double x0 = -grid.half_width, y0 = -grid.half_height;
  auto id = [nx](int i, int j) { return static_cast<Index>(j * nx + i); };

  std::vector<Vec3> verts;
  verts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = x0 + i * grid.spacing, y = y0 + j * grid.spacing;
      verts.emplace_back(x, y, height(params, x, y));
    }
  std::vector<Face> faces;
  faces.reserve(2 * static_cast<std::size_t>(nx - 1) * (ny - 1));
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }

  SyntheticFace out;
  std::set<Index> seen;
  for (const auto& [x, y] : keypoint_layout()) {
    const int i = std::clamp(static_cast<int>(std::lround((x - x0) / grid.spacing)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::lround((y - y0) / grid.spacing)), 0, ny - 1);
    const Index v = id(i, j);
    if (!seen.insert(v).second)
      fail(ErrorCode::Degenerate, "grid spacing " + std::to_string(grid.spacing) +
                                      " mm is too coarse: two keypoints share a vertex");
    out.annotations.keypoints.push_back(v);
  }
  out.annotations.slots = KeypointSlots{};

  auto& regions = out.annotations.regions;
  for (Index f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    const double cx = (verts[t[0]].x() + verts[t[1]].x() + verts[t[2]].x()) / 3.0;
    const double cy = (verts[t[0]].y() + verts[t[1]].y() + verts[t[2]].y()) / 3.0;
    if (in_ellipse(cx, cy, 0.0, 10.0, 20.0, 28.0)) regions["nose"].push_back(f);
    if (in_ellipse(cx, cy, 0.0, -40.0, 32.0, 15.0)) regions["mouth"].push_back(f);
    if (in_ellipse(cx, cy, 0.0, 72.0, 48.0, 18.0)) regions["forehead"].push_back(f);
    if (in_ellipse(std::abs(cx), cy, 47.0, -2.0, 17.0, 20.0)) regions["cheek"].push_back(f);
  }
  out.mesh = TriangleMesh(std::move(verts), std::move(faces));
  return out;
}

TriangleMesh replace_region(const TriangleMesh& base, const TriangleMesh& donor, const RegionMask& region,
                            int blend_rings) {
  if (donor.vertex_count() != base.vertex_count() || donor.faces() != base.faces())
    fail(ErrorCode::TopologyMismatch, "donor mesh does not share the base topology");
  if (blend_rings < 0) fail(ErrorCode::InvalidArgument, "blend ring count must be non-negative");
  const std::vector<int> ring = vertex_ring_distance(base, region.vertex_ids(), blend_rings);
  std::vector<Vec3> verts = base.vertices();
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (ring[v] < 0) continue;
    if (ring[v] == 0) {
      verts[v] = donor.vertices()[v];
      continue;
    }
    const double w = 1.0 - static_cast<double>(ring[v]) / (blend_rings + 1);
    verts[v] = base.vertices()[v] + w * (donor.vertices()[v] - base.vertices()[v]);
  }
  return base.with_vertices(std::move(verts));
}

CorrespondenceMap identity_correspondences(const TriangleMesh& mesh, std::string source_id, std::string target_id) {
  CorrespondenceMap map(MapKind::VertexToVertex, std::move(source_id), std::move(target_id));
  map.reserve(mesh.vertex_count());
  for (Index v = 0; v < mesh.vertex_count(); ++v) map.add_vertex(v, v);
  return map;
}

}  // namespace regal
