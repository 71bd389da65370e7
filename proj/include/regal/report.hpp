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

// Evaluation report model and its JSON form. The layout is documented in
// docs/report_schema.md; field names are stable.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "regal/metric.hpp"

namespace regal {

inline constexpr const char* kReportSchema = "regal.eval.report";
inline constexpr int kReportSchemaVersion = 1;

struct GicpRow {
  ErrorStats stats;
  int iterations = 0;
  bool converged = false;
};

struct ShapeReport {
  std::string name;
  bool ok = false;
  std::string error;  // set when !ok
  std::vector<std::pair<std::string, ErrorStats>> regions;  // bICP, config order
  std::optional<ErrorStats> all_pooled;
  std::optional<ErrorStats> all_region_mean;
  std::optional<GicpRow> gicp_pred_to_gt;
  std::optional<GicpRow> gicp_gt_to_pred;
  std::vector<std::string> notes;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single shape
};

struct SummaryRow {
  std::string name;
  std::size_t count = 0;  // shapes contributing
  MeanStd nmse_mm2, rms_mm, mean_mm;
};

struct EvalReport {
  nlohmann::json metadata = nlohmann::json::object();  // not covered by determinism
  nlohmann::json config = nlohmann::json::object();    // resolved configuration echo
  std::vector<ShapeReport> shapes;
};

MeanStd mean_std(const std::vector<double>& values);

/// Per-row mean and std over the successful shapes. Rows: each bICP region,
/// "all_pooled", "all_region_mean", "gicp_pred_to_gt", "gicp_gt_to_pred".
std::vector<SummaryRow> summarize(const EvalReport& report);

/// Rounds to 9 significant digits; the report stores only rounded values.
double round_sig9(double v);

nlohmann::json report_to_json(const EvalReport& report);
/// Parses and validates: schema tag and version, required fields, types,
/// non-negative statistics, rms^2 == nmse within rounding, and summary
/// rows equal to those recomputed from the shapes. Throws Error(Parse).
EvalReport report_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
std::string dump_report(const EvalReport& report);
EvalReport parse_report(const std::string& text);

/// The report JSON without its metadata block.
std::string report_payload(const std::string& text);

}  // namespace regal
