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

#include "oracles.hpp"
#include "regal/commands.hpp"
#include "regal/io.hpp"
#include "regal/morphable.hpp"
#include "regal/synth.hpp"
#include "regal/topology.hpp"

using namespace regal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Procedural fixtures at a coarse spacing, generated once per process.
const fs::path& fixture_dir() {
  static const fs::path dir = [] {
    const fs::path d = oracle::temp_dir("commands_fixture");
    SynthOptions o;
    o.generate = true;
    o.spacing = 3.0;
    o.out_dir = d;
    REQUIRE(cmd_synth(o) == kExitOk);
    return d;
  }();
  return dir;
}

json read_json(const fs::path& p) { return json::parse(read_text_file(p)); }

void write_json(const fs::path& p, const json& j) { write_text_file(p, j.dump(2)); }

struct Captured {
  std::vector<std::string> lines;
  LogFn fn() {
    return [this](const std::string& l) { lines.push_back(l); };
  }
  bool contains(const std::string& s) const {
    for (const auto& l : lines)
      if (l.find(s) != std::string::npos) return true;
    return false;
  }
};

}  // namespace

TEST_CASE("synth writes the fixture set") {
  const fs::path& d = fixture_dir();
  for (const char* r : {"nose", "mouth", "forehead", "cheek"}) {
    CHECK(fs::exists(d / (std::string("pred_") + r + ".obj")));
    CHECK(fs::exists(d / (std::string("donor_") + r + ".obj")));
    const CorrespondenceMap corr = load_correspondences(d / (std::string("gt_corr_") + r + ".json"));
    const TriangleMesh gt = load_mesh(d / "gt.obj");
    REQUIRE(corr.size() == gt.vertex_count());
    for (const auto& e : corr.entries()) CHECK(e.source_vertex == e.target);
  }
  const json eval = read_json(d / "eval.json");
  CHECK(eval["pairs"].size() == 4);
}

TEST_CASE("synth with the base as donor is exact") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("synth_self");
  SynthOptions o;
  o.base = d / "gt.obj";
  o.base_annotations = d / "gt.json";
  o.donors = {d / "gt.obj"};
  o.regions = {"nose", "cheek"};
  o.out_dir = out;
  REQUIRE(cmd_synth(o) == kExitOk);
  const TriangleMesh gt = load_mesh(d / "gt.obj");
  CHECK(load_mesh(out / "pred_nose.obj").vertices() == gt.vertices());
  CHECK(load_mesh(out / "pred_cheek.obj").vertices() == gt.vertices());
}

TEST_CASE("synth without blending only moves the region") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("synth_noblend");
  SynthOptions o;
  o.base = d / "gt.obj";
  o.base_annotations = d / "gt.json";
  o.donors = {d / "donor_nose.obj"};
  o.regions = {"nose"};
  o.blend_rings = 0;
  o.out_dir = out;
  REQUIRE(cmd_synth(o) == kExitOk);
  const TriangleMesh gt = load_mesh(d / "gt.obj");
  const TriangleMesh donor = load_mesh(d / "donor_nose.obj");
  const TriangleMesh pred = load_mesh(out / "pred_nose.obj");
  const Annotations ann = load_annotations(d / "gt.json");
  const RegionMask nose(gt, ann.regions.at("nose"));
  std::size_t moved = 0;
  for (Index v = 0; v < gt.vertex_count(); ++v) {
    if (nose.contains_vertex(v)) {
      CHECK(pred.vertex(v) == donor.vertex(v));
      moved += pred.vertex(v) != gt.vertex(v);
    } else {
      CHECK(pred.vertex(v) == gt.vertex(v));
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("synth configuration errors") {
  SynthOptions o;
  o.out_dir = oracle::temp_dir("synth_bad");
  o.base = "/nonexistent/base.obj";
  CHECK(cmd_synth(o) == kExitConfig);
  o.generate = true;
  o.regions = {"ear"};
  Captured log;
  CHECK(cmd_synth(o, log.fn()) == kExitConfig);
  CHECK(log.contains("ear"));
}

TEST_CASE("eval reports are deterministic across job counts") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("eval_det");
  EvalOverrides a, b;
  a.jobs = 1;
  a.report = out / "a.json";
  b.jobs = 4;
  b.report = out / "b.json";
  EvalReport ra;
  REQUIRE(cmd_eval(d / "eval.json", a, {}, &ra) == kExitOk);
  REQUIRE(cmd_eval(d / "eval.json", b) == kExitOk);
  const std::string ta = read_text_file(out / "a.json");
  const std::string tb = read_text_file(out / "b.json");
  // Only the echoed job count and report path differ.
  json pa = json::parse(report_payload(ta)), pb = json::parse(report_payload(tb));
  CHECK(pa["config"]["jobs"] == 1);
  CHECK(pb["config"]["jobs"] == 4);
  pa.erase("config");
  pb.erase("config");
  CHECK(pa.dump() == pb.dump());
  REQUIRE(cmd_eval(d / "eval.json", a) == kExitOk);
  CHECK(report_payload(read_text_file(out / "a.json")) == report_payload(ta));
  CHECK(ra.shapes.size() == 4);
  for (const auto& s : ra.shapes) {
    CHECK(s.ok);
    CHECK(s.regions.size() == 4);
    CHECK(s.gicp_pred_to_gt.has_value());
    CHECK(s.gicp_gt_to_pred.has_value());
  }

  // The nose fixture concentrates its error on the nose.
  const ShapeReport& nose = ra.shapes.front();
  REQUIRE(nose.name == "nose");
  double worst_other = 0.0, nose_err = 0.0;
  for (const auto& [name, st] : nose.regions) {
    if (name == "nose") nose_err = st.nmse_mm2;
    else worst_other = std::max(worst_other, st.nmse_mm2);
  }
  CHECK(nose_err > 10.0 * worst_other);

  // Config echo materialises every default.
  const json report = read_json(out / "a.json");
  CHECK(report["config"].contains("nicp"));
  CHECK(report["config"].contains("ricp"));
  CHECK(report["config"]["jobs"] == 1);
}

TEST_CASE("report round trip") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("eval_roundtrip");
  EvalOverrides o;
  o.report = out / "r.json";
  o.regions = parse_region_list("nose,mouth");
  REQUIRE(cmd_eval(d / "eval.json", o) == kExitOk);
  const std::string text = read_text_file(out / "r.json");
  const EvalReport r = parse_report(text);
  CHECK(dump_report(r) == text);
  CHECK(r.shapes.front().regions.size() == 2);

  // A tampered summary is rejected.
  json j = json::parse(text);
  j["summary"]["rows"][0]["nmse_mm2"]["mean"] = 123.0;
  CHECK_THROWS_AS(parse_report(j.dump()), Error);
}

TEST_CASE("batch isolation") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("eval_batch");
  json config = read_json(d / "eval.json");
  for (auto& p : config["pairs"])
    for (const char* key : {"pred", "gt", "gt_annotations", "pred_keypoints"})
      p[key] = (d / p[key].get<std::string>()).string();
  json broken = config["pairs"][1];
  broken["name"] = "broken";
  broken["pred"] = (out / "missing.obj").string();
  config["pairs"].insert(config["pairs"].begin() + 1, broken);
  config["output"]["report"] = (out / "report.json").string();
  write_json(out / "eval.json", config);

  Captured log;
  EvalReport r;
  CHECK(cmd_eval(out / "eval.json", {}, log.fn(), &r) == kExitPartial);
  REQUIRE(r.shapes.size() == 5);
  CHECK(!r.shapes[1].ok);
  CHECK(r.shapes[1].error.find("missing.obj") != std::string::npos);
  CHECK(r.shapes[0].ok);
  CHECK(r.shapes[2].ok);
  CHECK(log.contains("1 failed"));

  const json report = read_json(out / "report.json");
  CHECK(report["summary"]["shapes_failed"] == 1);
  CHECK(report["summary"]["shapes_ok"] == 4);
  for (const auto& row : report["summary"]["rows"]) CHECK(row["shape_count"].get<int>() <= 4);
}

TEST_CASE("eval configuration errors exit with 2") {
  const fs::path out = oracle::temp_dir("eval_config");
  CHECK(cmd_eval(out / "absent.json", {}) == kExitConfig);
  write_text_file(out / "garbage.json", "{ not json");
  CHECK(cmd_eval(out / "garbage.json", {}) == kExitConfig);
  write_json(out / "typo.json", json{{"pairs", json::array()}, {"ricp", {{"max_iter", 5}}}});
  Captured log;
  CHECK(cmd_eval(out / "typo.json", {}, log.fn()) == kExitConfig);
  CHECK(log.contains("max_iter"));
  EvalOverrides neg;
  neg.jobs = -1;
  write_json(out / "ok.json", json{{"pairs", json::array()}});
  CHECK(cmd_eval(out / "ok.json", neg) == kExitConfig);
}

TEST_CASE("gicp only mode") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("eval_gicp");
  EvalOverrides o;
  o.gicp_only = true;
  o.report = out / "r.json";
  EvalReport r;
  REQUIRE(cmd_eval(d / "eval.json", o, {}, &r) == kExitOk);
  for (const auto& s : r.shapes) {
    CHECK(s.regions.empty());
    CHECK(s.gicp_pred_to_gt.has_value());
  }
}

TEST_CASE("heatmap export") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("eval_heat");
  EvalConfig config = load_eval_config(d / "eval.json");
  config.pairs.resize(1);
  config.export_heatmaps = true;
  config.heatmap_dir = out / "heat";
  config.report = out / "r.json";
  REQUIRE(run_eval(config) == kExitOk);
  const fs::path ply = out / "heat" / "nose_nose.ply";
  REQUIRE(fs::exists(ply));
  const std::vector<double> err = load_ply_vertex_error(ply);
  CHECK(!err.empty());
  for (double e : err) CHECK(e >= 0.0);
}

TEST_CASE("transfer command") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("transfer_cmd");
  const TriangleMesh low = load_mesh(d / "gt.obj");
  const TriangleMesh high = subdivide_midpoint(low);
  save_obj(high, out / "high.obj");

  TransferCommandOptions o;
  o.low = d / "gt.obj";
  o.low_annotations = d / "gt.json";
  o.high = out / "high.obj";
  o.out = out / "high.json";
  REQUIRE(cmd_transfer(o) == kExitOk);
  const Annotations low_ann = load_annotations(d / "gt.json");
  const Annotations high_ann = load_annotations(out / "high.json");
  CHECK(high_ann.keypoints == low_ann.keypoints);
  for (const auto& [name, faces] : low_ann.regions) {
    const std::set<Index> got(high_ann.regions.at(name).begin(), high_ann.regions.at(name).end());
    for (Index f : faces)
      for (Index c = 0; c < 4; ++c) CHECK(got.count(4 * f + c) == 1);
  }

  o.crop = true;
  o.regions = {"nose"};
  o.out = out / "cropped.json";
  CHECK(cmd_transfer(o) == kExitOk);

  // Cropping needs the nose and eye slots.
  Annotations few = low_ann;
  few.keypoints.resize(20);
  save_annotations(few, out / "few.json");
  o.low_annotations = out / "few.json";
  Captured log;
  CHECK(cmd_transfer(o, log.fn()) == kExitConfig);
  CHECK(log.contains("nose_tip"));

  o.low = out / "absent.obj";
  CHECK(cmd_transfer(o) == kExitConfig);
}

TEST_CASE("basis build and fit commands") {
  const fs::path& d = fixture_dir();
  const fs::path out = oracle::temp_dir("basis_cmd");
  const TriangleMesh gt = load_mesh(d / "gt.obj");
  // Two known directions over the face: a shift in z and a shear in x.
  std::vector<fs::path> meshes;
  for (int i = 0; i < 6; ++i) {
    std::vector<Vec3> v = gt.vertices();
    const double a = std::sin(1.3 * i) * 3.0, b = std::cos(0.7 * i + 0.2);
    for (Vec3& p : v) {
      p.z() += a;
      p.x() += b * 0.02 * p.y();
    }
    meshes.push_back(out / ("m" + std::to_string(i) + ".obj"));
    save_obj(gt.with_vertices(v), meshes.back());
  }
  BasisBuildOptions bo;
  bo.meshes = meshes;
  bo.out = out / "basis.bin";
  REQUIRE(cmd_basis_build(bo) == kExitOk);
  CHECK(load_basis(bo.out).component_count() == 2);

  BasisFitOptions fo;
  fo.basis = bo.out;
  fo.target = meshes[3];
  fo.out = out / "fit.json";
  fo.annotations = d / "gt.json";
  fo.export_heatmaps = true;
  fo.heatmap_dir = out / "heat";
  fs::create_directories(fo.heatmap_dir);
  REQUIRE(cmd_basis_fit(fo) == kExitOk);
  const json fit = read_json(fo.out);
  CHECK(fit["component_count"] == 2);
  CHECK(fit["residual"]["rms_mm"].get<double>() < 1e-8);
  CHECK(fit["regions"].size() == 4);
  CHECK(fs::exists(fo.heatmap_dir / "fit_nose.ply"));

  fo.target = d / "donor_nose.obj";
  CHECK(cmd_basis_fit(fo) == kExitOk);
  {
    const TriangleMesh other = oracle::grid_mesh(4, 4);
    save_obj(other, out / "other.obj");
    fo.target = out / "other.obj";
    Captured log;
    CHECK(cmd_basis_fit(fo, log.fn()) == kExitConfig);
    CHECK(log.contains("vertices"));
  }
  bo.meshes = {meshes[0], out / "other.obj"};
  CHECK(cmd_basis_build(bo) == kExitConfig);
}
