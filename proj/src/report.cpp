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

#include "regal/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace regal {

using nlohmann::json;

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig9(v);
}

json stats_json(const ErrorStats& s) {
  return json{{"nmse_mm2", number(s.nmse_mm2)},
              {"rms_mm", number(s.rms_mm)},
              {"mean_mm", number(s.mean_mm)},
              {"vertex_count", s.count}};
}

json gicp_json(const GicpRow& g) {
  json j = stats_json(g.stats);
  j["iterations"] = g.iterations;
  j["converged"] = g.converged;
  return j;
}

ErrorStats rounded(const ErrorStats& s) {
  return {round_sig9(s.nmse_mm2), round_sig9(s.rms_mm), round_sig9(s.mean_mm), s.count};
}

// Summaries are computed from the rounded per-shape values so that a reader
// recomputing them from the file gets identical numbers.
EvalReport rounded(const EvalReport& in) {
  EvalReport r = in;
  for (ShapeReport& s : r.shapes) {
    for (auto& [name, st] : s.regions) st = rounded(st);
    if (s.all_pooled) s.all_pooled = rounded(*s.all_pooled);
    if (s.all_region_mean) s.all_region_mean = rounded(*s.all_region_mean);
    if (s.gicp_pred_to_gt) s.gicp_pred_to_gt->stats = rounded(s.gicp_pred_to_gt->stats);
    if (s.gicp_gt_to_pred) s.gicp_gt_to_pred->stats = rounded(s.gicp_gt_to_pred->stats);
  }
  return r;
}

json mean_std_json(const MeanStd& m) { return json{{"mean", number(m.mean)}, {"std", number(m.std)}}; }

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::Parse, "report " + where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

double num(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) bad(where, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

// Region means of rms and nmse are averaged separately, so they need not
// satisfy rms^2 = nmse.
ErrorStats stats_from_json(const json& j, const std::string& where, bool pooled = true) {
  ErrorStats s;
  s.nmse_mm2 = num(j, "nmse_mm2", where);
  s.rms_mm = num(j, "rms_mm", where);
  s.mean_mm = num(j, "mean_mm", where);
  const json& c = field(j, "vertex_count", where);
  if (!c.is_number_unsigned()) bad(where, "vertex_count must be a non-negative integer");
  s.count = c.get<std::size_t>();
  if (s.nmse_mm2 < 0.0 || s.rms_mm < 0.0 || s.mean_mm < 0.0) bad(where, "statistics must be non-negative");
  if (pooled && std::abs(s.rms_mm * s.rms_mm - s.nmse_mm2) > 1e-7 * std::max(1.0, s.nmse_mm2))
    bad(where, "rms_mm squared does not equal nmse_mm2");
  if (s.mean_mm > s.rms_mm * (1.0 + 1e-7) + 1e-12) bad(where, "mean_mm exceeds rms_mm");
  return s;
}

GicpRow gicp_from_json(const json& j, const std::string& where) {
  GicpRow g;
  g.stats = stats_from_json(j, where);
  const json& it = field(j, "iterations", where);
  const json& cv = field(j, "converged", where);
  if (!it.is_number_integer() || !cv.is_boolean()) bad(where, "iterations/converged have the wrong type");
  g.iterations = it.get<int>();
  g.converged = cv.get<bool>();
  return g;
}

}  // namespace

double round_sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::vector<SummaryRow> summarize(const EvalReport& report) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<ErrorStats>> rows;
  auto add = [&](const std::string& name, const ErrorStats& s) {
    if (!rows.count(name)) order.push_back(name);
    rows[name].push_back(s);
  };
  for (const ShapeReport& shape : report.shapes) {
    if (!shape.ok) continue;
    for (const auto& [name, s] : shape.regions) add(name, s);
    if (shape.all_pooled) add("all_pooled", *shape.all_pooled);
    if (shape.all_region_mean) add("all_region_mean", *shape.all_region_mean);
    if (shape.gicp_pred_to_gt) add("gicp_pred_to_gt", shape.gicp_pred_to_gt->stats);
    if (shape.gicp_gt_to_pred) add("gicp_gt_to_pred", shape.gicp_gt_to_pred->stats);
  }
  std::vector<SummaryRow> out;
  for (const std::string& name : order) {
    const auto& list = rows[name];
    std::vector<double> a, b, c;
    for (const ErrorStats& s : list) {
      a.push_back(s.nmse_mm2);
      b.push_back(s.rms_mm);
      c.push_back(s.mean_mm);
    }
    out.push_back({name, list.size(), mean_std(a), mean_std(b), mean_std(c)});
  }
  return out;
}

json report_to_json(const EvalReport& input) {
  const EvalReport report = rounded(input);
  json shapes = json::array();
  std::size_t ok = 0;
  for (const ShapeReport& s : report.shapes) {
    json j{{"name", s.name}, {"status", s.ok ? "ok" : "failed"}};
    if (!s.ok) {
      j["error"] = s.error;
    } else {
      ++ok;
      json regions = json::array();
      for (const auto& [name, st] : s.regions) {
        json r = stats_json(st);
        r["name"] = name;
        regions.push_back(std::move(r));
      }
      j["bicp"] = json{{"regions", regions}};
      if (s.all_pooled) j["bicp"]["all_pooled"] = stats_json(*s.all_pooled);
      if (s.all_region_mean) j["bicp"]["all_region_mean"] = stats_json(*s.all_region_mean);
      if (s.gicp_pred_to_gt) j["gicp_pred_to_gt"] = gicp_json(*s.gicp_pred_to_gt);
      if (s.gicp_gt_to_pred) j["gicp_gt_to_pred"] = gicp_json(*s.gicp_gt_to_pred);
    }
    j["notes"] = s.notes;
    shapes.push_back(std::move(j));
  }
  json summary_rows = json::array();
  for (const SummaryRow& row : summarize(report)) {
    summary_rows.push_back(json{{"name", row.name},
                                {"shape_count", row.count},
                                {"nmse_mm2", mean_std_json(row.nmse_mm2)},
                                {"rms_mm", mean_std_json(row.rms_mm)},
                                {"mean_mm", mean_std_json(row.mean_mm)}});
  }
  return json{{"schema", kReportSchema},
              {"schema_version", kReportSchemaVersion},
              {"metadata", report.metadata},
              {"config", report.config},
              {"shapes", shapes},
              {"summary",
               {{"shapes_total", report.shapes.size()},
                {"shapes_ok", ok},
                {"shapes_failed", report.shapes.size() - ok},
                {"rows", summary_rows}}}};
}

EvalReport report_from_json(const json& j) {
  const std::string top = "root";
  const json& schema = field(j, "schema", top);
  if (!schema.is_string() || schema.get<std::string>() != kReportSchema) bad(top, "unexpected schema tag");
  const json& version = field(j, "schema_version", top);
  if (!version.is_number_integer() || version.get<int>() != kReportSchemaVersion)
    bad(top, "unsupported schema_version");
  EvalReport r;
  r.metadata = field(j, "metadata", top);
  r.config = field(j, "config", top);
  if (!r.metadata.is_object() || !r.config.is_object()) bad(top, "metadata and config must be objects");
  const json& shapes = field(j, "shapes", top);
  if (!shapes.is_array()) bad(top, "shapes must be an array");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string where = "shapes[" + std::to_string(i) + "]";
    const json& sj = shapes[i];
    ShapeReport s;
    const json& name = field(sj, "name", where);
    const json& status = field(sj, "status", where);
    if (!name.is_string() || !status.is_string()) bad(where, "name and status must be strings");
    s.name = name.get<std::string>();
    const std::string st = status.get<std::string>();
    if (st != "ok" && st != "failed") bad(where, "status must be 'ok' or 'failed'");
    s.ok = st == "ok";
    const json& notes = field(sj, "notes", where);
    if (!notes.is_array()) bad(where, "notes must be an array");
    for (const json& n : notes) {
      if (!n.is_string()) bad(where, "notes must be strings");
      s.notes.push_back(n.get<std::string>());
    }
    if (!s.ok) {
      const json& e = field(sj, "error", where);
      if (!e.is_string()) bad(where, "error must be a string");
      s.error = e.get<std::string>();
    } else {
      const json& bicp = field(sj, "bicp", where);
      const json& regions = field(bicp, "regions", where + ".bicp");
      if (!regions.is_array()) bad(where, "bicp.regions must be an array");
      for (const json& rj : regions) {
        const json& rn = field(rj, "name", where + ".bicp.regions");
        if (!rn.is_string()) bad(where, "region name must be a string");
        s.regions.emplace_back(rn.get<std::string>(), stats_from_json(rj, where + ".bicp." + rn.get<std::string>()));
      }
      if (bicp.contains("all_pooled")) s.all_pooled = stats_from_json(bicp["all_pooled"], where + ".all_pooled");
      if (bicp.contains("all_region_mean"))
        s.all_region_mean = stats_from_json(bicp["all_region_mean"], where + ".all_region_mean", false);
      if (sj.contains("gicp_pred_to_gt"))
        s.gicp_pred_to_gt = gicp_from_json(sj["gicp_pred_to_gt"], where + ".gicp_pred_to_gt");
      if (sj.contains("gicp_gt_to_pred"))
        s.gicp_gt_to_pred = gicp_from_json(sj["gicp_gt_to_pred"], where + ".gicp_gt_to_pred");
    }
    r.shapes.push_back(std::move(s));
  }
  // The summary must be exactly what the shapes imply.
  const json& summary = field(j, "summary", top);
  const json expected = report_to_json(r)["summary"];
  if (summary != expected) bad("summary", "does not match the statistics recomputed from the shapes");
  return r;
}

std::string dump_report(const EvalReport& report) { return report_to_json(report).dump(2) + "\n"; }

EvalReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(j);
}

std::string report_payload(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("report is not valid JSON: ") + e.what());
  }
  j.erase("metadata");
  return j.dump(2);
}

}  // namespace regal
