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

#include <doctest.h>

#include <functional>
#include <random>

#include "ablation.hpp"
#include "oracles.hpp"
#include "regal/bicp.hpp"
#include "regal/nicp.hpp"
#include "regal/synth.hpp"
#include "regal/topology.hpp"

using namespace regal;

namespace {

NicpSchedule single_stage(double distance, double landmark, double stiffness, double decay, int steps) {
  NicpSchedule s;
  s.stages.push_back({distance, landmark, stiffness, decay, steps});
  return s;
}

LandmarkPairs sample_landmarks(const TriangleMesh& source, const std::function<Vec3(const Vec3&)>& map, int count) {
  LandmarkPairs lm;
  const Index step = static_cast<Index>(source.vertex_count() / static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const Index v = static_cast<Index>(k) * step;
    lm.source_vertices.push_back(v);
    lm.target_points.push_back(map(source.vertex(v)));
  }
  return lm;
}

// Smooth non-rigid warp used to build random targets.
struct Warp {
  Vec3 a, b, c;
  double freq;
  Vec3 operator()(const Vec3& p) const {
    return p + a * std::sin(freq * p.x()) + b * std::cos(freq * p.y()) + c * std::sin(freq * p.z());
  }
};

double max_transform_spread(const DeformationState& s) {
  double spread = 0.0;
  for (const Affine34& t : s.transforms) spread = std::max(spread, (t - s.transforms.front()).norm());
  return spread;
}

}  // namespace

TEST_CASE("default schedule matches the two stage weights") {
  const NicpSchedule s = NicpSchedule::two_stage_default();
  REQUIRE(s.stages.size() == 2);
  CHECK(s.stages[0].distance_weight == 0.0);
  CHECK(s.stages[0].landmark_weight == 50.0);
  CHECK(s.stages[0].stiffness_weight == 150.0);
  CHECK(s.stages[1].distance_weight == 1.0);
  CHECK(s.stages[1].landmark_weight == 5.0);
  CHECK(s.stages[1].stiffness_weight == 50.0);
  for (const auto& st : s.stages) {
    CHECK(st.decay_factor == 0.5);
    CHECK(st.steps == 4);
  }
  NicpSchedule bad = s;
  bad.stages[0].decay_factor = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = s;
  bad.stages[1].stiffness_weight = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("zero deformation is a fixed point") {
  std::mt19937 rng(1);
  const TriangleMesh m = oracle::bumpy_sphere(rng, 10, 14, 30.0);
  const LandmarkPairs lm = sample_landmarks(m, [](const Vec3& p) { return p; }, 8);
  const DeformationState s = nicp_deform(m, m, lm, NicpSchedule::two_stage_default());
  for (Index v = 0; v < m.vertex_count(); ++v) CHECK((s.deformed[v] - m.vertex(v)).norm() < 1e-6);
}

TEST_CASE("pure translation target is recovered") {
  std::mt19937 rng(2);
  const TriangleMesh m = oracle::bumpy_sphere(rng, 12, 18, 30.0, 16, 20.0);
  const Vec3 shift(3, 0, 0);
  TriangleMesh target = m.with_vertices([&] {
    std::vector<Vec3> v = m.vertices();
    for (Vec3& p : v) p += shift;
    return v;
  }());
  const LandmarkPairs lm = sample_landmarks(m, [&](const Vec3& p) { return p + shift; }, 10);
  NicpSchedule s = single_stage(1.0, 5.0, 500.0, 0.9, 4);
  s.tol = 1e-7;
  s.max_inner_iters = 100;
  const DeformationState d = nicp_deform(m, target, lm, s);
  double worst = 0.0;
  for (Index v = 0; v < m.vertex_count(); ++v) worst = std::max(worst, (d.deformed[v] - target.vertex(v)).norm());
  CHECK(worst < 0.01);
}

TEST_CASE("deformation state is consistent with its transforms") {
  std::mt19937 rng(3);
  const TriangleMesh m = oracle::bumpy_sphere(rng, 8, 12, 30.0);
  const Warp w{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 0.5), 0.08};
  const TriangleMesh target = m.with_vertices([&] {
    std::vector<Vec3> v;
    for (const Vec3& p : m.vertices()) v.push_back(w(p));
    return v;
  }());
  const DeformationState d = nicp_deform(m, target, sample_landmarks(m, w, 8), NicpSchedule::two_stage_default());
  REQUIRE(d.transforms.size() == m.vertex_count());
  for (Index v = 0; v < m.vertex_count(); ++v) {
    const Vec3 q = d.transforms[v].leftCols<3>() * d.rest[v] + d.transforms[v].col(3);
    CHECK((q - d.deformed[v]).norm() < 1e-9);
  }
}

TEST_CASE("every solve lowers its objective") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int fixture = 0; fixture < 20; ++fixture) {
    const TriangleMesh m = oracle::bumpy_sphere(rng, 7 + fixture % 4, 10 + fixture % 5, 25.0);
    const Warp w{Vec3(uni(rng), uni(rng), uni(rng)), Vec3(uni(rng), uni(rng), uni(rng)),
                 Vec3(uni(rng), uni(rng), uni(rng)), 0.05 + 0.05 * std::abs(uni(rng))};
    const auto rigid = oracle::random_rigid(rng, 0.2, 3.0);
    const TriangleMesh target = m.with_vertices([&] {
      std::vector<Vec3> v;
      for (const Vec3& p : m.vertices()) v.push_back(rigid.apply(w(p)));
      return v;
    }());
    const DeformationState d =
        nicp_deform(m, target, sample_landmarks(m, [&](const Vec3& p) { return rigid.apply(w(p)); }, 8),
                    NicpSchedule::two_stage_default());
    REQUIRE(!d.log.empty());
    for (const NicpSolveLog& e : d.log) CHECK(e.objective_after <= e.objective_before * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("objective accessor agrees with the solver log") {
  std::mt19937 rng(5);
  const TriangleMesh m = oracle::bumpy_sphere(rng, 8, 12, 25.0);
  const SpatialIndex index(m);
  const Warp w{Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), Vec3(0, 0, 0.5), 0.1};
  const TriangleMesh target = m.with_vertices([&] {
    std::vector<Vec3> v;
    for (const Vec3& p : m.vertices()) v.push_back(w(p));
    return v;
  }());
  NicpSchedule s = single_stage(1.0, 0.0, 20.0, 1.0, 1);
  s.max_inner_iters = 1;
  const DeformationState d = nicp_deform(m, target, {}, s);
  REQUIRE(d.log.size() == 1);
  // The single solve starts from the identity with correspondences projected from the rest shape.
  const SpatialIndex target_index(target);
  std::vector<Vec3> corr;
  for (const Vec3& p : m.vertices()) corr.push_back(target_index.nearest(p).point);
  std::vector<Affine34> identity(m.vertex_count(), Affine34::Identity());
  CHECK(nicp_objective(m, identity, corr, {}, 1.0, 0.0, 20.0, 1.0) ==
        doctest::Approx(d.log[0].objective_before).epsilon(1e-9));
  CHECK(nicp_objective(m, d.transforms, corr, {}, 1.0, 0.0, 20.0, 1.0) ==
        doctest::Approx(d.log[0].objective_after).epsilon(1e-9));
}

TEST_CASE("large stiffness collapses to one affine transform") {
  std::mt19937 rng(6);
  const TriangleMesh m = oracle::bumpy_sphere(rng, 7, 10, 20.0);
  const Warp w{Vec3(1.5, 0, 0), Vec3(0, 1.5, 0), Vec3(0, 0, 1.0), 0.15};
  const TriangleMesh target = m.with_vertices([&] {
    std::vector<Vec3> v;
    for (const Vec3& p : m.vertices()) v.push_back(w(p));
    return v;
  }());
  auto spread_at = [&](double stiffness) {
    NicpSchedule s = single_stage(1.0, 0.0, stiffness, 1.0, 1);
    return max_transform_spread(nicp_deform(m, target, {}, s));
  };
  const double soft = spread_at(1.0);
  const double stiff = spread_at(1e6);
  const double stiffer = spread_at(1e8);
  CHECK(stiff < soft);
  CHECK(stiffer < stiff);
  CHECK(stiffer < 1e-5);
}

TEST_CASE("isolated vertices make the system singular") {
  const TriangleMesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(5, 5, 5)}, {{0, 1, 2}});
  try {
    nicp_deform(m, m, {}, NicpSchedule::two_stage_default());
    FAIL("expected a singular system");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
  }
}

TEST_CASE("landmark-only stage is skipped when landmarks cannot pin an affine map") {
  std::mt19937 rng(7);
  const TriangleMesh m = oracle::bumpy_sphere(rng, 8, 12, 25.0);
  const DeformationState d = nicp_deform(m, m, sample_landmarks(m, [](const Vec3& p) { return p; }, 2),
                                         NicpSchedule::two_stage_default());
  REQUIRE(d.notes.size() == 1);
  CHECK(d.notes[0].find("stage 1 skipped") != std::string::npos);
}

TEST_CASE("induced correspondences") {
  const SyntheticFace face = generate_face({}, {3.0, 75.0, 95.0});
  const RegionMask nose(face.mesh, face.annotations.regions.at("nose"));
  const Submesh sub = extract_submesh(face.mesh, nose.face_ids());

  DeformationState zero;
  zero.rest = sub.mesh.vertices();
  zero.deformed = sub.mesh.vertices();
  const CorrespondenceMap id = induce_correspondences(zero, nose, face.mesh);
  const auto pts = map_target_coordinates(id, face.mesh);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK((pts[i] - face.mesh.vertex(nose.vertex_ids()[i])).norm() < 1e-12);

  // A deformed vertex placed inside a face maps to that face with its barycentrics.
  DeformationState inside = zero;
  const Face& f0 = face.mesh.face(nose.face_ids()[0]);
  inside.deformed[0] = 0.2 * face.mesh.vertex(f0[0]) + 0.3 * face.mesh.vertex(f0[1]) + 0.5 * face.mesh.vertex(f0[2]);
  const CorrespondenceMap one = induce_correspondences(inside, nose, face.mesh);
  CHECK(one.entries()[0].target == nose.face_ids()[0]);
  CHECK(one.entries()[0].bary[0] == doctest::Approx(0.2));
  CHECK(one.entries()[0].bary[2] == doctest::Approx(0.5));

  std::mt19937 rng(8);
  std::normal_distribution<double> noise(0.0, 1.5);
  const Warp w{Vec3(noise(rng), noise(rng), noise(rng)), Vec3(noise(rng), noise(rng), noise(rng)),
               Vec3(noise(rng), noise(rng), noise(rng)), 0.07};
  DeformationState smooth = zero;
  for (Vec3& p : smooth.deformed) p = w(p);
  const CorrespondenceMap induced = induce_correspondences(smooth, nose, face.mesh);
  for (std::size_t i = 0; i < induced.size(); ++i) {
    const auto brute = oracle::brute_nearest(smooth.deformed[i], face.mesh);
    CHECK(induced.entries()[i].target == brute.face);
    CHECK((interpolate(face.mesh, induced.entries()[i].target, induced.entries()[i].bary) - brute.point).norm() < 1e-9);
  }
  CHECK_THROWS_AS(induce_correspondences(zero, nose, TriangleMesh()), Error);
}

TEST_CASE("bicp on identical meshes reports zero") {
  const SyntheticFace face = generate_face({}, {3.0, 75.0, 95.0});
  const KeypointSet kp(face.annotations.keypoints, 68);
  std::vector<NamedRegion> regions;
  for (const std::string& name : kFaceRegionNames)
    regions.push_back({name, RegionMask(face.mesh, face.annotations.regions.at(name))});
  const BicpResult r = bicp_evaluate(face.mesh, face.mesh, regions, kp, kp);
  std::size_t total = 0;
  for (const auto& ev : r.regions) {
    CHECK(ev.report.stats.nmse_mm2 < 1e-8);
    CHECK_NOTHROW(ev.report.validate());
    total += ev.report.stats.count;
  }
  CHECK(r.pooled.stats.count == total);
  CHECK(r.region_mean.nmse_mm2 < 1e-8);
  CHECK_THROWS_AS(bicp_evaluate(face.mesh, face.mesh, {}, kp, kp), Error);
}

TEST_CASE("region report statistics are recomputable") {
  const RegionReport r = make_region_report("x", {1, 2, 3}, {1.0, 2.0, 2.0});
  CHECK(r.stats.nmse_mm2 == doctest::Approx(3.0));
  CHECK(r.stats.mean_mm == doctest::Approx(5.0 / 3.0));
  CHECK(r.stats.rms_mm == doctest::Approx(std::sqrt(3.0)));
  RegionReport broken = r;
  broken.stats.nmse_mm2 += 1e-6;
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("bicp failures carry the region name") {
  const SyntheticFace face = generate_face({}, {4.0, 75.0, 95.0});
  const KeypointSet kp(face.annotations.keypoints, 68);
  std::vector<NamedRegion> regions{{"nose", RegionMask(face.mesh, face.annotations.regions.at("nose"))}};
  NicpSchedule bad = NicpSchedule::two_stage_default();
  bad.stages[1].distance_weight = std::nan("");
  try {
    bicp_evaluate(face.mesh, face.mesh, regions, kp, kp, bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("nose") != std::string::npos);
  }
}

TEST_CASE("bicp localizes a nose replacement") {
  const auto fx = ablation::run_fixture(0);
  const double nose = fx.regions[0].bicp_nmse;
  for (std::size_t r = 1; r < fx.regions.size(); ++r) CHECK(fx.regions[r].bicp_nmse < 0.05 * nose);
  CHECK(fx.corr_bicp < fx.corr_gicp);
}

TEST_CASE("bicp error is stable under subdivision of the prediction") {
  const SyntheticFace base = generate_face({}, {3.0, 75.0, 95.0});
  const SyntheticFace donor = generate_face(donor_face_params(0), {3.0, 75.0, 95.0});
  const KeypointSet kp(base.annotations.keypoints, 68);
  std::vector<NamedRegion> regions;
  for (const std::string& name : kFaceRegionNames)
    regions.push_back({name, RegionMask(base.mesh, base.annotations.regions.at(name))});
  const TriangleMesh pred = replace_region(base.mesh, donor.mesh, regions[0].mask);
  const BicpResult a = bicp_evaluate(pred, base.mesh, regions, kp, kp);
  const BicpResult b = bicp_evaluate(subdivide_midpoint(pred), base.mesh, regions, kp, kp);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const double x = a.regions[r].report.stats.nmse_mm2, y = b.regions[r].report.stats.nmse_mm2;
    CHECK(std::abs(x - y) <= 0.02 * x);
  }
}

TEST_CASE("edits outside a region's support leave its error unchanged") {
  const SyntheticFace base = generate_face({}, {3.0, 75.0, 95.0});
  const SyntheticFace donor = generate_face(donor_face_params(0), {3.0, 75.0, 95.0});
  const KeypointSet kp(base.annotations.keypoints, 68);
  const NamedRegion nose{"nose", RegionMask(base.mesh, base.annotations.regions.at("nose"))};
  const TriangleMesh pred = replace_region(base.mesh, donor.mesh, nose.mask);

  // Push the top rows of the face (far above the nose, no keypoints) forward.
  std::vector<Vec3> v = pred.vertices();
  std::set<Index> keypoints(kp.indices().begin(), kp.indices().end());
  std::size_t moved = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i].y() > 80.0 && !keypoints.count(i)) {
      v[i].z() += 15.0;
      ++moved;
    }
  REQUIRE(moved > 50);
  const TriangleMesh edited = pred.with_vertices(v);
  const SpatialIndex a_index(pred), b_index(edited);
  const auto schedule = NicpSchedule::two_stage_default();
  const double a =
      bicp_evaluate_region(pred, a_index, base.mesh, nose, kp, kp, schedule, {}).report.stats.nmse_mm2;
  const double b =
      bicp_evaluate_region(edited, b_index, base.mesh, nose, kp, kp, schedule, {}).report.stats.nmse_mm2;
  CHECK(std::abs(a - b) < 0.01 * a);
}
