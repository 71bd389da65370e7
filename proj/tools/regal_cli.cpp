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

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regal/regal.h"

namespace {

constexpr int kUsageError = 2;

void log_line(void*, const char* line) { std::fprintf(stderr, "%s\n", line); }

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int report_failure(int code) {
  const char* msg = regal_last_error();
  if (code != 0 && msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-aware evaluation of 3D face reconstructions"};
  app.set_version_flag("--version", regal_version());
  app.require_subcommand(1);

  // eval
  std::string config, eval_regions, report;
  int jobs = -1;
  bool heatmaps = false, gicp_only = false;
  auto* eval = app.add_subcommand("eval", "Evaluate prediction/ground-truth pairs listed in a config file");
  eval->add_option("--config", config, "Evaluation config (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("--jobs", jobs, "Shapes evaluated in parallel (0 = all cores)")->check(CLI::NonNegativeNumber);
  eval->add_option("--regions", eval_regions, "Comma list of region names or name=faces.json");
  eval->add_flag("--export-heatmaps", heatmaps, "Write per-region error PLY files");
  eval->add_flag("--gicp-only", gicp_only, "Skip bICP, run only the global ICP baseline");
  eval->add_option("--report", report, "Report path (overrides the config)");

  // synth
  bool generate = false;
  double spacing = 2.0;
  int blend = 2;
  std::string base, base_ann, synth_regions, out_dir;
  std::vector<std::string> donors;
  auto* synth = app.add_subcommand("synth", "Build region-replacement fixtures with known correspondences");
  synth->add_flag("--generate", generate, "Use the procedural base face and donors");
  synth->add_option("--spacing", spacing, "Procedural grid spacing in mm")->check(CLI::PositiveNumber);
  synth->add_option("--base", base, "Base mesh");
  synth->add_option("--annotations", base_ann, "Annotations of the base mesh");
  synth->add_option("--donor", donors, "Donor mesh (repeatable, one per region or one for all)");
  synth->add_option("--regions", synth_regions, "Comma list of regions to replace");
  synth->add_option("--blend", blend, "Blend band width in vertex rings")->check(CLI::NonNegativeNumber);
  synth->add_option("--out", out_dir, "Output directory")->required();

  // transfer
  std::string low, low_ann, high, transfer_out, transfer_regions, exclusions;
  bool crop = false, no_bbox = false;
  auto* transfer = app.add_subcommand("transfer", "Transfer regions and keypoints from a low- to a high-resolution mesh");
  transfer->add_option("--low", low, "Low-resolution mesh")->required()->check(CLI::ExistingFile);
  transfer->add_option("--low-annotations", low_ann, "Annotations of the low mesh")->required()->check(CLI::ExistingFile);
  transfer->add_option("--high", high, "High-resolution mesh")->required()->check(CLI::ExistingFile);
  transfer->add_option("--out", transfer_out, "Output annotations for the high mesh")->required();
  transfer->add_option("--regions", transfer_regions, "Comma list of regions (default: all)");
  transfer->add_option("--exclude", exclusions, "Comma list of low-mesh regions to subtract");
  transfer->add_flag("--crop", crop, "Apply the nose-radius crop");
  transfer->add_flag("--no-bbox", no_bbox, "Search every high vertex in the reverse pass");

  // basis
  auto* basis = app.add_subcommand("basis", "Morphable basis operations");
  basis->require_subcommand(1);
  std::vector<std::string> meshes;
  std::string basis_out;
  double cutoff = 0.999;
  auto* build = basis->add_subcommand("build", "PCA basis from meshes sharing one topology");
  build->add_option("meshes", meshes, "Input meshes")->required()->check(CLI::ExistingFile);
  build->add_option("--cutoff", cutoff, "Cumulative explained-variance cutoff")->check(CLI::Range(0.0, 1.0));
  build->add_option("--out", basis_out, "Basis file")->required();

  std::string basis_in, target, fit_out, fit_ann, fit_regions, heat_dir = "heatmaps";
  double weight = 0.0;
  bool fit_heatmaps = false;
  auto* fit = basis->add_subcommand("fit", "Fit basis coefficients to a mesh");
  fit->add_option("--basis", basis_in, "Basis file")->required()->check(CLI::ExistingFile);
  fit->add_option("--target", target, "Target mesh (basis topology)")->required()->check(CLI::ExistingFile);
  fit->add_option("--weight", weight, "Coefficient regularisation weight")->check(CLI::NonNegativeNumber);
  fit->add_option("--out", fit_out, "Coefficient file (JSON)")->required();
  fit->add_option("--annotations", fit_ann, "Region annotations for per-region residuals");
  fit->add_option("--regions", fit_regions, "Comma list of regions");
  fit->add_flag("--export-heatmaps", fit_heatmaps, "Write per-region residual PLY files");
  fit->add_option("--heatmap-dir", heat_dir, "Heatmap directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (eval->parsed()) {
    regal_eval_options o;
    regal_eval_options_default(&o);
    o.config_path = config.c_str();
    o.jobs = jobs;
    o.regions = or_null(eval_regions);
    o.export_heatmaps = heatmaps;
    o.gicp_only = gicp_only;
    o.report_path = or_null(report);
    o.log = log_line;
    return report_failure(regal_cmd_eval(&o));
  }
  if (synth->parsed()) {
    std::vector<const char*> donor_ptrs;
    for (const std::string& d : donors) donor_ptrs.push_back(d.c_str());
    regal_synth_options o;
    regal_synth_options_default(&o);
    o.generate = generate;
    o.spacing = spacing;
    o.base = or_null(base);
    o.base_annotations = or_null(base_ann);
    o.donors = donor_ptrs.data();
    o.donor_count = donor_ptrs.size();
    o.regions = or_null(synth_regions);
    o.blend_rings = blend;
    o.out_dir = out_dir.c_str();
    o.log = log_line;
    return report_failure(regal_cmd_synth(&o));
  }
  if (transfer->parsed()) {
    regal_transfer_options o;
    regal_transfer_options_default(&o);
    o.low = low.c_str();
    o.low_annotations = low_ann.c_str();
    o.high = high.c_str();
    o.out = transfer_out.c_str();
    o.regions = or_null(transfer_regions);
    o.exclusions = or_null(exclusions);
    o.crop = crop;
    o.use_bounding_box = !no_bbox;
    o.log = log_line;
    return report_failure(regal_cmd_transfer(&o));
  }
  if (build->parsed()) {
    std::vector<const char*> ptrs;
    for (const std::string& m : meshes) ptrs.push_back(m.c_str());
    regal_basis_build_options o;
    regal_basis_build_options_default(&o);
    o.meshes = ptrs.data();
    o.mesh_count = ptrs.size();
    o.cutoff = cutoff;
    o.out = basis_out.c_str();
    o.log = log_line;
    return report_failure(regal_cmd_basis_build(&o));
  }
  if (fit->parsed()) {
    regal_basis_fit_options o;
    regal_basis_fit_options_default(&o);
    o.basis = basis_in.c_str();
    o.target = target.c_str();
    o.reg_weight = weight;
    o.out = fit_out.c_str();
    o.annotations = or_null(fit_ann);
    o.regions = or_null(fit_regions);
    o.export_heatmaps = fit_heatmaps;
    o.heatmap_dir = heat_dir.c_str();
    o.log = log_line;
    return report_failure(regal_cmd_basis_fit(&o));
  }
  return kUsageError;
}
