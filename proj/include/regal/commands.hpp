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

// Batch commands behind the command-line tool. Each returns a process exit
// code: 0 success, 1 partial failure, 2 configuration or I/O error.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "regal/icp.hpp"
#include "regal/nicp.hpp"
#include "regal/report.hpp"

namespace regal {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

using LogFn = std::function<void(const std::string&)>;

struct EvalPair {
  std::string name;
  std::filesystem::path pred;
  std::filesystem::path gt;
  std::filesystem::path gt_annotations;
  std::filesystem::path pred_keypoints;  // annotation file; only "keypoints" is read
};

/// A region to evaluate: a name looked up in the GT annotations, or a name
/// bound to a JSON file holding a face-id list.
struct RegionSpec {
  std::string name;
  std::optional<std::filesystem::path> faces_file;
};

struct EvalConfig {
  std::vector<EvalPair> pairs;
  std::vector<RegionSpec> regions;  // defaults to nose, mouth, forehead, cheek
  IcpParams ricp;
  IcpParams gicp;
  bool gicp_keypoint_init = true;
  NicpSchedule nicp = NicpSchedule::two_stage_default();
  std::filesystem::path report = "report.json";
  bool export_heatmaps = false;
  std::filesystem::path heatmap_dir = "heatmaps";
  bool gicp_only = false;
  int jobs = 0;  // 0 = available cores
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
/// Throws Error(Parse) or Error(InvalidArgument).
EvalConfig parse_eval_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
EvalConfig load_eval_config(const std::filesystem::path& path);
/// Every parameter materialised, paths as given after resolution.
nlohmann::json eval_config_to_json(const EvalConfig& config);

/// `name` or `name=faces.json`, comma separated.
std::vector<RegionSpec> parse_region_list(const std::string& list);

struct EvalOverrides {
  std::optional<int> jobs;
  std::optional<std::vector<RegionSpec>> regions;
  bool export_heatmaps = false;
  bool gicp_only = false;
  std::optional<std::filesystem::path> report;
};

/// Evaluates one pair. Throws on failure.
ShapeReport evaluate_pair(const EvalPair& pair, const EvalConfig& config, const LogFn& log = {});

/// Runs every pair (shape-level parallel), writes the report, returns the
/// report through `out` when given.
int cmd_eval(const std::filesystem::path& config_path, const EvalOverrides& overrides, const LogFn& log = {},
             EvalReport* out = nullptr);
int run_eval(const EvalConfig& config, const LogFn& log = {}, EvalReport* out = nullptr);

struct SynthOptions {
  /// Procedural mode: write a base face and four donors before replacing.
  bool generate = false;
  double spacing = 2.0;
  std::filesystem::path base;              // base mesh (ignored when generating)
  std::filesystem::path base_annotations;  // regions and keypoints of the base
  std::vector<std::filesystem::path> donors;
  /// Regions to replace, paired with donors by position; when there is one
  /// donor it is used for every region.
  std::vector<std::string> regions;
  int blend_rings = 2;
  std::filesystem::path out_dir;
};

/// Writes, per replaced region, pred_<region>.obj, pred_<region>.json
/// (keypoints), gt_corr_<region>.json (identity map), plus gt.obj, gt.json
/// and an eval.json config covering every fixture.
int cmd_synth(const SynthOptions& options, const LogFn& log = {});

struct TransferCommandOptions {
  std::filesystem::path low;
  std::filesystem::path low_annotations;
  std::filesystem::path high;
  std::filesystem::path out;
  std::vector<std::string> regions;     // empty = all annotated regions
  std::vector<std::string> exclusions;  // region names on the low mesh
  bool crop = false;
  bool use_bounding_box = true;
};

int cmd_transfer(const TransferCommandOptions& options, const LogFn& log = {});

struct BasisBuildOptions {
  std::vector<std::filesystem::path> meshes;
  double cutoff = 0.999;
  std::filesystem::path out;
};

int cmd_basis_build(const BasisBuildOptions& options, const LogFn& log = {});

struct BasisFitOptions {
  std::filesystem::path basis;
  std::filesystem::path target;
  double reg_weight = 0.0;
  std::filesystem::path out;  // coefficient JSON
  std::optional<std::filesystem::path> annotations;  // enables per-region errors
  std::vector<std::string> regions;
  bool export_heatmaps = false;
  std::filesystem::path heatmap_dir = "heatmaps";
};

/// Coefficient file: {"alpha": [...], "reg_weight", "residual": stats,
/// "regions": [stats + name]} with per-vertex residuals of the fit.
int cmd_basis_fit(const BasisFitOptions& options, const LogFn& log = {});

}  // namespace regal
