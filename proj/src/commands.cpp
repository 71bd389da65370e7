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

#include "regal/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <mutex>
#include <set>
#include <thread>

#include "regal/bicp.hpp"
#include "regal/io.hpp"
#include "regal/metric.hpp"
#include "regal/morphable.hpp"
#include "regal/synth.hpp"
#include "regal/topology.hpp"
#include "regal/transfer.hpp"
#include "regal/version.hpp"

namespace regal {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void emit(const LogFn& log, const std::string& line) {
  if (log) log(line);
}

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::Parse, "config " + where + ": " + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      config_error(where, "unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    config_error(where, std::string("key '") + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

IcpParams parse_icp(const json& j, const std::string& where) {
  IcpParams p;
  if (j.is_null()) return p;
  check_keys(j, {"max_iters", "tol", "max_distance"}, where);
  p.max_iters = get_or(j, "max_iters", p.max_iters, where);
  p.tol = get_or(j, "tol", p.tol, where);
  if (j.contains("max_distance") && !j["max_distance"].is_null())
    p.max_distance = get_or(j, "max_distance", 0.0, where);
  if (p.max_iters < 1) config_error(where, "max_iters must be >= 1");
  if (!(p.tol >= 0.0)) config_error(where, "tol must be >= 0");
  if (p.max_distance && !(*p.max_distance > 0.0)) config_error(where, "max_distance must be > 0");
  return p;
}

json icp_json(const IcpParams& p) {
  return json{{"max_iters", p.max_iters},
              {"tol", p.tol},
              {"max_distance", p.max_distance ? json(*p.max_distance) : json(nullptr)}};
}

NicpSchedule parse_nicp(const json& j, const std::string& where) {
  NicpSchedule s = NicpSchedule::two_stage_default();
  if (j.is_null()) return s;
  check_keys(j, {"stages", "tol", "max_inner_iters", "skew_weight"}, where);
  if (j.contains("stages")) {
    const json& st = j["stages"];
    if (!st.is_array() || st.empty()) config_error(where, "stages must be a non-empty array");
    s.stages.clear();
    for (std::size_t i = 0; i < st.size(); ++i) {
      const std::string w = where + ".stages[" + std::to_string(i) + "]";
      check_keys(st[i], {"distance_weight", "landmark_weight", "stiffness_weight", "decay_factor", "steps"}, w);
      NicpStage stage;
      stage.distance_weight = get_or(st[i], "distance_weight", stage.distance_weight, w);
      stage.landmark_weight = get_or(st[i], "landmark_weight", stage.landmark_weight, w);
      stage.stiffness_weight = get_or(st[i], "stiffness_weight", stage.stiffness_weight, w);
      stage.decay_factor = get_or(st[i], "decay_factor", stage.decay_factor, w);
      stage.steps = get_or(st[i], "steps", stage.steps, w);
      s.stages.push_back(stage);
    }
  }
  s.tol = get_or(j, "tol", s.tol, where);
  s.max_inner_iters = get_or(j, "max_inner_iters", s.max_inner_iters, where);
  s.skew_weight = get_or(j, "skew_weight", s.skew_weight, where);
  try {
    s.validate();
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  return s;
}

json nicp_json(const NicpSchedule& s) {
  json stages = json::array();
  for (const NicpStage& st : s.stages)
    stages.push_back(json{{"distance_weight", st.distance_weight},
                          {"landmark_weight", st.landmark_weight},
                          {"stiffness_weight", st.stiffness_weight},
                          {"decay_factor", st.decay_factor},
                          {"steps", st.steps}});
  return json{{"stages", stages}, {"tol", s.tol}, {"max_inner_iters", s.max_inner_iters}, {"skew_weight", s.skew_weight}};
}

std::vector<RegionSpec> default_regions() {
  std::vector<RegionSpec> r;
  for (const std::string& n : kFaceRegionNames) r.push_back({n, std::nullopt});
  return r;
}

RegionSpec parse_region_token(const std::string& token, const fs::path& base) {
  const auto eq = token.find('=');
  if (eq == std::string::npos) {
    if (token.empty()) fail(ErrorCode::InvalidArgument, "empty region name");
    return {token, std::nullopt};
  }
  const std::string name = token.substr(0, eq), file = token.substr(eq + 1);
  if (name.empty() || file.empty()) fail(ErrorCode::InvalidArgument, "region spec '" + token + "' must be name=file");
  return {name, resolve(base, file)};
}

std::vector<Index> read_face_list(const fs::path& path, const std::string& name) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  const json* list = &j;
  if (j.is_object()) {
    if (!j.contains("regions") || !j["regions"].contains(name))
      fail(ErrorCode::InvalidArgument, path.string() + ": no region '" + name + "'");
    list = &j["regions"][name];
  }
  if (!list->is_array()) fail(ErrorCode::Parse, path.string() + ": expected a list of face ids");
  std::vector<Index> ids;
  for (const json& v : *list) {
    if (!v.is_number_unsigned()) fail(ErrorCode::Parse, path.string() + ": face ids must be non-negative integers");
    ids.push_back(v.get<Index>());
  }
  return ids;
}

std::vector<NamedRegion> resolve_regions(const std::vector<RegionSpec>& specs, const TriangleMesh& gt,
                                         const Annotations& ann, const fs::path& ann_path) {
  std::vector<NamedRegion> out;
  std::set<std::string> seen;
  for (const RegionSpec& s : specs) {
    if (!seen.insert(s.name).second) fail(ErrorCode::InvalidArgument, "region '" + s.name + "' listed twice");
    std::vector<Index> ids;
    if (s.faces_file) {
      ids = read_face_list(*s.faces_file, s.name);
    } else {
      auto it = ann.regions.find(s.name);
      if (it == ann.regions.end())
        fail(ErrorCode::InvalidArgument, "region '" + s.name + "' is not annotated in " + ann_path.string());
      ids = it->second;
    }
    for (Index f : ids)
      if (f >= gt.face_count())
        fail(ErrorCode::InvalidArgument, "region '" + s.name + "' references face " + std::to_string(f) +
                                             " but the mesh has " + std::to_string(gt.face_count()));
    out.push_back({s.name, RegionMask(gt, std::move(ids))});
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

GicpRow gicp_row(const IcpResult& r, const TriangleMesh& target) {
  return {error_stats(r.aligned_source, r.map, target), r.iterations, r.converged};
}

json stats_out(const ErrorStats& s) {
  return json{{"nmse_mm2", round_sig9(s.nmse_mm2)},
              {"rms_mm", round_sig9(s.rms_mm)},
              {"mean_mm", round_sig9(s.mean_mm)},
              {"vertex_count", s.count}};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<RegionSpec> parse_region_list(const std::string& list) {
  std::vector<RegionSpec> out;
  for (const std::string& tok : split_list(list)) out.push_back(parse_region_token(tok, fs::current_path()));
  if (out.empty()) fail(ErrorCode::InvalidArgument, "region list is empty");
  return out;
}

EvalConfig parse_eval_config(const json& j, const fs::path& base_dir) {
  check_keys(j, {"pairs", "regions", "ricp", "gicp", "gicp_init", "nicp", "output", "jobs"}, "root");
  EvalConfig c;
  if (!j.contains("pairs") || !j["pairs"].is_array()) config_error("root", "'pairs' must be a list");
  std::set<std::string> names;
  for (std::size_t i = 0; i < j["pairs"].size(); ++i) {
    const json& p = j["pairs"][i];
    const std::string w = "pairs[" + std::to_string(i) + "]";
    check_keys(p, {"name", "pred", "gt", "gt_annotations", "pred_keypoints"}, w);
    EvalPair pair;
    for (const char* key : {"pred", "gt", "gt_annotations", "pred_keypoints"})
      if (!p.contains(key) || !p[key].is_string()) config_error(w, std::string("missing path '") + key + "'");
    pair.pred = resolve(base_dir, p["pred"].get<std::string>());
    pair.gt = resolve(base_dir, p["gt"].get<std::string>());
    pair.gt_annotations = resolve(base_dir, p["gt_annotations"].get<std::string>());
    pair.pred_keypoints = resolve(base_dir, p["pred_keypoints"].get<std::string>());
    pair.name = get_or(p, "name", pair.pred.stem().string(), w);
    if (!names.insert(pair.name).second) config_error(w, "duplicate pair name '" + pair.name + "'");
    c.pairs.push_back(std::move(pair));
  }
  if (j.contains("regions")) {
    const json& r = j["regions"];
    if (!r.is_array() || r.empty()) config_error("regions", "must be a non-empty list");
    for (const json& item : r) {
      if (item.is_string()) {
        c.regions.push_back(parse_region_token(item.get<std::string>(), base_dir));
      } else {
        check_keys(item, {"name", "faces"}, "regions");
        if (!item.contains("name") || !item["name"].is_string()) config_error("regions", "entry needs a name");
        RegionSpec s{item["name"].get<std::string>(), std::nullopt};
        if (item.contains("faces")) s.faces_file = resolve(base_dir, get_or<std::string>(item, "faces", "", "regions"));
        c.regions.push_back(std::move(s));
      }
    }
  } else {
    c.regions = default_regions();
  }
  c.ricp = parse_icp(j.value("ricp", json()), "ricp");
  c.gicp = parse_icp(j.value("gicp", json()), "gicp");
  const std::string init = get_or<std::string>(j, "gicp_init", "keypoints", "root");
  if (init != "keypoints" && init != "identity") config_error("gicp_init", "must be 'keypoints' or 'identity'");
  c.gicp_keypoint_init = init == "keypoints";
  c.nicp = parse_nicp(j.value("nicp", json()), "nicp");
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, {"report", "export_heatmaps", "heatmap_dir", "gicp_only"}, "output");
    c.report = resolve(base_dir, get_or<std::string>(o, "report", "report.json", "output"));
    c.export_heatmaps = get_or(o, "export_heatmaps", false, "output");
    c.heatmap_dir = resolve(base_dir, get_or<std::string>(o, "heatmap_dir", "heatmaps", "output"));
    c.gicp_only = get_or(o, "gicp_only", false, "output");
  } else {
    c.report = resolve(base_dir, "report.json");
    c.heatmap_dir = resolve(base_dir, "heatmaps");
  }
  c.jobs = get_or(j, "jobs", 0, "root");
  if (c.jobs < 0) config_error("jobs", "must be >= 0");
  return c;
}

EvalConfig load_eval_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return parse_eval_config(j, path.parent_path());
}

json eval_config_to_json(const EvalConfig& c) {
  json pairs = json::array();
  for (const EvalPair& p : c.pairs)
    pairs.push_back(json{{"name", p.name},
                         {"pred", p.pred.string()},
                         {"gt", p.gt.string()},
                         {"gt_annotations", p.gt_annotations.string()},
                         {"pred_keypoints", p.pred_keypoints.string()}});
  json regions = json::array();
  for (const RegionSpec& r : c.regions) {
    json e{{"name", r.name}};
    e["faces"] = r.faces_file ? json(r.faces_file->string()) : json(nullptr);
    regions.push_back(std::move(e));
  }
  return json{{"pairs", pairs},
              {"regions", regions},
              {"ricp", icp_json(c.ricp)},
              {"gicp", icp_json(c.gicp)},
              {"gicp_init", c.gicp_keypoint_init ? "keypoints" : "identity"},
              {"nicp", nicp_json(c.nicp)},
              {"output",
               {{"report", c.report.string()},
                {"export_heatmaps", c.export_heatmaps},
                {"heatmap_dir", c.heatmap_dir.string()},
                {"gicp_only", c.gicp_only}}},
              {"jobs", c.jobs}};
}

ShapeReport evaluate_pair(const EvalPair& pair, const EvalConfig& config, const LogFn& log) {
  ShapeReport out;
  out.name = pair.name;
  const TriangleMesh pred = load_mesh(pair.pred);
  const TriangleMesh gt = load_mesh(pair.gt);
  const Annotations gt_ann = load_annotations(pair.gt_annotations);
  const Annotations pred_ann = load_annotations(pair.pred_keypoints);
  if (gt_ann.keypoints.size() != pred_ann.keypoints.size())
    fail(ErrorCode::InvalidArgument, "keypoint counts differ: gt has " + std::to_string(gt_ann.keypoints.size()) +
                                         ", pred has " + std::to_string(pred_ann.keypoints.size()));
  const std::size_t semantic = gt_ann.keypoints.size() == kEvaluationKeypointCount ? kEvaluationKeypointCount : 0;
  const KeypointSet gt_kp(gt_ann.keypoints, semantic);
  const KeypointSet pred_kp(pred_ann.keypoints, semantic);
  gt_kp.validate_for(gt);
  pred_kp.validate_for(pred);
  for (const auto* m : {&pred, &gt}) {
    const auto slivers = m->degenerate_faces();
    if (!slivers.empty())
      out.notes.push_back(std::string(m == &pred ? "pred" : "gt") + " mesh has " + std::to_string(slivers.size()) +
                          " zero-area faces");
  }

  if (!config.gicp_only) {
    const std::vector<NamedRegion> regions = resolve_regions(config.regions, gt, gt_ann, pair.gt_annotations);
    const BicpResult b = bicp_evaluate(pred, gt, regions, pred_kp, gt_kp, config.nicp, config.ricp);
    for (const RegionEvaluation& ev : b.regions) {
      out.regions.emplace_back(ev.report.name, ev.report.stats);
      for (const std::string& n : ev.notes) out.notes.push_back(ev.report.name + ": " + n);
    }
    out.all_pooled = b.pooled.stats;
    out.all_region_mean = b.region_mean;
    if (config.export_heatmaps) {
      for (std::size_t i = 0; i < regions.size(); ++i) {
        const Submesh sub = extract_submesh(gt, regions[i].mask.face_ids());
        const fs::path file = config.heatmap_dir / (safe_name(pair.name) + "_" + safe_name(regions[i].name) + ".ply");
        save_ply(sub.mesh, file, b.regions[i].report.vertex_errors);
        emit(log, "wrote " + file.string());
      }
    }
  }

  SimilarityTransform init = SimilarityTransform::identity();
  if (config.gicp_keypoint_init && gt_kp.size() >= 3) {
    try {
      init = solve_similarity(pred_kp.positions(pred), gt_kp.positions(gt), {}, false);
    } catch (const Error& e) {
      out.notes.push_back(std::string("gicp keypoint initialisation skipped: ") + e.what());
    }
  }
  const IcpResult forward = gicp(pred, gt, init, config.gicp);
  out.gicp_pred_to_gt = gicp_row(forward, gt);
  const IcpResult backward = gicp(gt, pred, init.inverse(), config.gicp);
  out.gicp_gt_to_pred = gicp_row(backward, pred);
  out.ok = true;
  return out;
}

int run_eval(const EvalConfig& config, const LogFn& log, EvalReport* out) {
  EvalReport report;
  report.config = eval_config_to_json(config);
  report.shapes.resize(config.pairs.size());
  unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs) : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, std::max<std::size_t>(1, config.pairs.size()));

  std::mutex log_mutex;
  auto locked_log = [&](const std::string& line) {
    std::lock_guard<std::mutex> lock(log_mutex);
    emit(log, line);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.pairs.size(); i = next++) {
      const EvalPair& pair = config.pairs[i];
      try {
        report.shapes[i] = evaluate_pair(pair, config, locked_log);
        locked_log("shape '" + pair.name + "': ok");
      } catch (const std::exception& e) {
        ShapeReport failed;
        failed.name = pair.name;
        failed.error = e.what();
        report.shapes[i] = std::move(failed);
        locked_log("shape '" + pair.name + "': failed: " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  report.metadata = json{{"tool", "regal"}, {"version", kVersionString}, {"generated_at", utc_timestamp()},
                         {"jobs", jobs}};
  std::size_t failed = 0;
  for (const ShapeReport& s : report.shapes) failed += s.ok ? 0 : 1;
  try {
    write_text_file(config.report, dump_report(report));
  } catch (const Error& e) {
    emit(log, std::string("cannot write report: ") + e.what());
    return kExitConfig;
  }
  emit(log, "wrote " + config.report.string() + " (" + std::to_string(report.shapes.size() - failed) + " ok, " +
                std::to_string(failed) + " failed)");
  if (out) *out = std::move(report);
  return failed ? kExitPartial : kExitOk;
}

int cmd_eval(const fs::path& config_path, const EvalOverrides& overrides, const LogFn& log, EvalReport* out) {
  EvalConfig config;
  try {
    config = load_eval_config(config_path);
  } catch (const Error& e) {
    emit(log, e.what());
    return kExitConfig;
  }
  if (overrides.jobs) config.jobs = *overrides.jobs;
  if (overrides.regions) config.regions = *overrides.regions;
  if (overrides.export_heatmaps) config.export_heatmaps = true;
  if (overrides.gicp_only) config.gicp_only = true;
  if (overrides.report) config.report = *overrides.report;
  if (config.jobs < 0) {
    emit(log, "--jobs must be >= 0");
    return kExitConfig;
  }
  return run_eval(config, log, out);
}

int cmd_synth(const SynthOptions& o, const LogFn& log) {
  try {
    TriangleMesh base;
    Annotations ann;
    std::vector<TriangleMesh> donors;
    std::vector<std::string> regions = o.regions;
    fs::create_directories(o.out_dir);
    if (o.generate) {
      FaceGridOptions grid;
      grid.spacing = o.spacing;
      SyntheticFace face = generate_face({}, grid);
      base = std::move(face.mesh);
      ann = std::move(face.annotations);
      if (regions.empty()) regions.assign(kFaceRegionNames.begin(), kFaceRegionNames.end());
      for (const std::string& r : regions) {
        const auto it = std::find(kFaceRegionNames.begin(), kFaceRegionNames.end(), r);
        if (it == kFaceRegionNames.end()) fail(ErrorCode::InvalidArgument, "no procedural donor for region '" + r + "'");
        donors.push_back(generate_face(donor_face_params(static_cast<int>(it - kFaceRegionNames.begin())), grid).mesh);
        save_obj(donors.back(), o.out_dir / ("donor_" + r + ".obj"));
      }
    } else {
      base = load_mesh(o.base);
      ann = load_annotations(o.base_annotations);
      if (o.donors.empty()) fail(ErrorCode::InvalidArgument, "synth needs at least one donor mesh");
      if (regions.empty()) fail(ErrorCode::InvalidArgument, "synth needs at least one region to replace");
      if (o.donors.size() != 1 && o.donors.size() != regions.size())
        fail(ErrorCode::InvalidArgument, "give one donor, or one donor per region");
      for (const fs::path& d : o.donors) donors.push_back(load_mesh(d));
    }
    save_obj(base, o.out_dir / "gt.obj");
    save_annotations(ann, o.out_dir / "gt.json");
    Annotations pred_ann;
    pred_ann.keypoints = ann.keypoints;
    pred_ann.slots = ann.slots;

    json pairs = json::array();
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const std::string& r = regions[i];
      auto it = ann.regions.find(r);
      if (it == ann.regions.end()) fail(ErrorCode::InvalidArgument, "region '" + r + "' is not annotated on the base");
      const TriangleMesh& donor = donors.size() == 1 ? donors.front() : donors[i];
      const TriangleMesh pred = replace_region(base, donor, RegionMask(base, it->second), o.blend_rings);
      const std::string stem = "pred_" + safe_name(r);
      save_obj(pred, o.out_dir / (stem + ".obj"));
      save_annotations(pred_ann, o.out_dir / (stem + ".json"));
      save_correspondences(identity_correspondences(base, "gt", stem), o.out_dir / ("gt_corr_" + safe_name(r) + ".json"));
      pairs.push_back(json{{"name", r},
                           {"pred", stem + ".obj"},
                           {"gt", "gt.obj"},
                           {"gt_annotations", "gt.json"},
                           {"pred_keypoints", stem + ".json"}});
      emit(log, "wrote " + (o.out_dir / (stem + ".obj")).string());
    }
    json regions_json = json::array();
    for (const auto& [name, faces] : ann.regions) regions_json.push_back(name);
    const json eval{{"pairs", pairs}, {"regions", regions_json}, {"output", {{"report", "report.json"}}}};
    write_text_file(o.out_dir / "eval.json", eval.dump(2) + "\n");
    emit(log, "wrote " + (o.out_dir / "eval.json").string());
    return kExitOk;
  } catch (const std::exception& e) {
    emit(log, std::string("synth: ") + e.what());
    return kExitConfig;
  }
}

int cmd_transfer(const TransferCommandOptions& o, const LogFn& log) {
  TriangleMesh low, high;
  Annotations low_ann;
  try {
    low = load_mesh(o.low);
    high = load_mesh(o.high);
    low_ann = load_annotations(o.low_annotations);
  } catch (const std::exception& e) {
    emit(log, std::string("transfer: ") + e.what());
    return kExitConfig;
  }
  std::vector<std::string> names = o.regions;
  if (names.empty())
    for (const auto& [name, faces] : low_ann.regions)
      if (std::find(o.exclusions.begin(), o.exclusions.end(), name) == o.exclusions.end()) names.push_back(name);

  Annotations out;
  out.slots = low_ann.slots;
  int status = kExitOk;
  try {
    std::optional<RegionMask> exclusion;
    if (!o.exclusions.empty()) {
      std::vector<Index> faces;
      for (const std::string& e : o.exclusions) {
        auto it = low_ann.regions.find(e);
        if (it == low_ann.regions.end()) fail(ErrorCode::InvalidArgument, "exclusion region '" + e + "' is not annotated");
        faces.insert(faces.end(), it->second.begin(), it->second.end());
      }
      exclusion.emplace(low, std::move(faces));
    }
    const KeypointTransfer kt = transfer_keypoints(KeypointSet(low_ann.keypoints), low, high);
    for (const std::string& w : kt.warnings) emit(log, "warning: " + w);
    out.keypoints = kt.indices;
    std::optional<KeypointSet> high_kp;
    if (o.crop) {
      if (!kt.warnings.empty())
        fail(ErrorCode::InvalidArgument, "--crop needs distinct keypoints on the high mesh; see warnings above");
      high_kp.emplace(kt.indices);
    }
    TransferOptions topt;
    topt.use_bounding_box = o.use_bounding_box;
    for (const std::string& name : names) {
      auto it = low_ann.regions.find(name);
      if (it == low_ann.regions.end()) fail(ErrorCode::InvalidArgument, "region '" + name + "' is not annotated");
      try {
        RegionMask mask = transfer_region(RegionMask(low, it->second), low, high, exclusion ? &*exclusion : nullptr, topt);
        if (high_kp) mask = crop_by_nose_radius(high, *high_kp, mask, low_ann.slots.value_or(KeypointSlots{}));
        out.regions[name] = mask.face_ids();
        emit(log, "region '" + name + "': " + std::to_string(mask.face_ids().size()) + " faces");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument) throw;
        emit(log, "region '" + name + "': failed: " + e.what());
        status = kExitPartial;
      }
    }
    save_annotations(out, o.out);
  } catch (const std::exception& e) {
    emit(log, std::string("transfer: ") + e.what());
    return kExitConfig;
  }
  emit(log, "wrote " + o.out.string());
  return status;
}

int cmd_basis_build(const BasisBuildOptions& o, const LogFn& log) {
  try {
    std::vector<TriangleMesh> corpus;
    for (const fs::path& p : o.meshes) corpus.push_back(load_mesh(p));
    const MorphableBasis basis = pca_build(corpus, o.cutoff);
    save_basis(basis, o.out);
    emit(log, "basis: " + std::to_string(basis.component_count()) + " components, " +
                  std::to_string(basis.variances.sum() / basis.total_variance) + " of total variance; wrote " +
                  o.out.string());
    return kExitOk;
  } catch (const std::exception& e) {
    emit(log, std::string("basis build: ") + e.what());
    return kExitConfig;
  }
}

int cmd_basis_fit(const BasisFitOptions& o, const LogFn& log) {
  try {
    const MorphableBasis basis = load_basis(o.basis);
    const TriangleMesh target = load_mesh(o.target);
    const Eigen::VectorXd alpha = fit_to_mesh(basis, target, o.reg_weight);
    const TriangleMesh recon = reconstruct(basis, alpha);
    std::vector<double> residual(target.vertex_count());
    for (Index v = 0; v < target.vertex_count(); ++v) residual[v] = (recon.vertex(v) - target.vertex(v)).norm();

    json regions = json::array();
    if (o.annotations) {
      const Annotations ann = load_annotations(*o.annotations);
      std::vector<std::string> names = o.regions;
      if (names.empty())
        for (const auto& [name, faces] : ann.regions) names.push_back(name);
      for (const std::string& name : names) {
        auto it = ann.regions.find(name);
        if (it == ann.regions.end()) fail(ErrorCode::InvalidArgument, "region '" + name + "' is not annotated");
        const RegionMask mask(target, it->second);
        std::vector<double> err;
        for (Index v : mask.vertex_ids()) err.push_back(residual[v]);
        json r = stats_out(stats_from_distances(err));
        r["name"] = name;
        regions.push_back(std::move(r));
        if (o.export_heatmaps) {
          const Submesh sub = extract_submesh(recon, mask.face_ids());
          save_ply(sub.mesh, o.heatmap_dir / ("fit_" + safe_name(name) + ".ply"), err);
        }
      }
    }
    json a = json::array();
    for (Eigen::Index i = 0; i < alpha.size(); ++i) a.push_back(alpha(i));
    const ErrorStats total = stats_from_distances(residual);
    const json result{{"alpha", a},
                      {"component_count", alpha.size()},
                      {"reg_weight", o.reg_weight},
                      {"residual", stats_out(total)},
                      {"regions", regions}};
    write_text_file(o.out, result.dump(2) + "\n");
    emit(log, "fit: residual rms " + std::to_string(total.rms_mm) + " mm; wrote " + o.out.string());
    return kExitOk;
  } catch (const std::exception& e) {
    emit(log, std::string("basis fit: ") + e.what());
    return kExitConfig;
  }
}

}  // namespace regal
