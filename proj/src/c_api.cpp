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

#include "regal/regal.h"

#include <cstring>
#include <new>
#include <string>

#include "regal/commands.hpp"
#include "regal/icp.hpp"
#include "regal/io.hpp"
#include "regal/morphable.hpp"
#include "regal/spatial_index.hpp"
#include "regal/version.hpp"

struct regal_mesh {
  regal::TriangleMesh mesh;
};

struct regal_basis {
  regal::MorphableBasis basis;
};

namespace {

thread_local std::string g_last_error;

regal_status to_status(regal::ErrorCode code) {
  switch (code) {
    case regal::ErrorCode::InvalidArgument: return REGAL_ERR_INVALID_ARGUMENT;
    case regal::ErrorCode::Parse: return REGAL_ERR_PARSE;
    case regal::ErrorCode::Io: return REGAL_ERR_IO;
    case regal::ErrorCode::Degenerate: return REGAL_ERR_DEGENERATE;
    case regal::ErrorCode::Singular: return REGAL_ERR_SINGULAR;
    case regal::ErrorCode::Numeric: return REGAL_ERR_NUMERIC;
    case regal::ErrorCode::TopologyMismatch: return REGAL_ERR_TOPOLOGY_MISMATCH;
    case regal::ErrorCode::Empty: return REGAL_ERR_EMPTY;
  }
  return REGAL_ERR_INTERNAL;
}

template <typename F>
regal_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return REGAL_OK;
  } catch (const regal::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return REGAL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return REGAL_ERR_INTERNAL;
  }
}

template <typename F>
int guarded_command(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return regal::kExitConfig;
  }
}

void require(const void* p, const char* what) {
  if (!p) regal::fail(regal::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

regal::LogFn make_log(regal_log_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const std::string& line) { fn(user, line.c_str()); };
}

std::vector<std::string> split(const char* list) {
  std::vector<std::string> out;
  if (!list) return out;
  std::string cur;
  for (const char* p = list;; ++p) {
    if (*p == ',' || *p == '\0') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      if (*p == '\0') break;
    } else {
      cur += *p;
    }
  }
  return out;
}

}  // namespace

extern "C" {

const char* regal_version(void) { return regal::kVersionString; }

const char* regal_last_error(void) { return g_last_error.c_str(); }

const char* regal_status_name(regal_status status) {
  switch (status) {
    case REGAL_OK: return "ok";
    case REGAL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case REGAL_ERR_PARSE: return "parse error";
    case REGAL_ERR_IO: return "I/O error";
    case REGAL_ERR_DEGENERATE: return "degenerate input";
    case REGAL_ERR_SINGULAR: return "singular system";
    case REGAL_ERR_NUMERIC: return "numeric failure";
    case REGAL_ERR_TOPOLOGY_MISMATCH: return "topology mismatch";
    case REGAL_ERR_EMPTY: return "empty input";
    case REGAL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

regal_status regal_mesh_create(const double* vertices, size_t vertex_count, const uint32_t* faces, size_t face_count,
                               regal_mesh** out) {
  return guarded([&] {
    require(out, "out");
    if (vertex_count) require(vertices, "vertices");
    if (face_count) require(faces, "faces");
    std::vector<regal::Vec3> v(vertex_count);
    for (size_t i = 0; i < vertex_count; ++i) v[i] = {vertices[3 * i], vertices[3 * i + 1], vertices[3 * i + 2]};
    std::vector<regal::Face> f(face_count);
    for (size_t i = 0; i < face_count; ++i) f[i] = {faces[3 * i], faces[3 * i + 1], faces[3 * i + 2]};
    *out = new regal_mesh{regal::TriangleMesh(std::move(v), std::move(f))};
  });
}

regal_status regal_mesh_load(const char* path, regal_mesh** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new regal_mesh{regal::load_mesh(path)};
  });
}

regal_status regal_mesh_save(const regal_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh, "mesh");
    require(path, "path");
    regal::save_mesh(mesh->mesh, path);
  });
}

void regal_mesh_free(regal_mesh* mesh) { delete mesh; }

size_t regal_mesh_vertex_count(const regal_mesh* mesh) { return mesh ? mesh->mesh.vertex_count() : 0; }

size_t regal_mesh_face_count(const regal_mesh* mesh) { return mesh ? mesh->mesh.face_count() : 0; }

regal_status regal_mesh_vertices(const regal_mesh* mesh, double* out, size_t capacity) {
  return guarded([&] {
    require(mesh, "mesh");
    require(out, "out");
    const auto& v = mesh->mesh.vertices();
    if (capacity < 3 * v.size()) regal::fail(regal::ErrorCode::InvalidArgument, "vertex buffer too small");
    for (size_t i = 0; i < v.size(); ++i)
      for (int k = 0; k < 3; ++k) out[3 * i + k] = v[i][k];
  });
}

regal_status regal_mesh_faces(const regal_mesh* mesh, uint32_t* out, size_t capacity) {
  return guarded([&] {
    require(mesh, "mesh");
    require(out, "out");
    const auto& f = mesh->mesh.faces();
    if (capacity < 3 * f.size()) regal::fail(regal::ErrorCode::InvalidArgument, "face buffer too small");
    for (size_t i = 0; i < f.size(); ++i)
      for (int k = 0; k < 3; ++k) out[3 * i + k] = f[i][k];
  });
}

regal_status regal_mesh_nearest_point(const regal_mesh* mesh, const double point[3], uint32_t* face, double bary[3],
                                      double closest[3], double* distance) {
  return guarded([&] {
    require(mesh, "mesh");
    require(point, "point");
    const regal::SpatialIndex index(mesh->mesh);
    const regal::SurfacePoint hit =
        regal::nearest_surface_point(regal::Vec3(point[0], point[1], point[2]), mesh->mesh, index);
    if (face) *face = hit.face;
    for (int k = 0; k < 3; ++k) {
      if (bary) bary[k] = hit.bary[k];
      if (closest) closest[k] = hit.point[k];
    }
    if (distance) *distance = hit.distance();
  });
}

void regal_icp_params_default(regal_icp_params* params) {
  if (!params) return;
  const regal::IcpParams d;
  params->max_iters = d.max_iters;
  params->tol = d.tol;
  params->max_distance = 0.0;
}

regal_status regal_gicp(const regal_mesh* source, const regal_mesh* target, const regal_icp_params* params,
                        regal_alignment* out) {
  return guarded([&] {
    require(source, "source");
    require(target, "target");
    require(out, "out");
    regal::IcpParams p;
    if (params) {
      p.max_iters = params->max_iters;
      p.tol = params->tol;
      if (params->max_distance > 0.0) p.max_distance = params->max_distance;
    }
    const regal::IcpResult r = regal::gicp(source->mesh, target->mesh, regal::SimilarityTransform::identity(), p);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out->rotation[3 * i + j] = r.transform.rotation(i, j);
      out->translation[i] = r.transform.translation[i];
    }
    out->final_nmse_mm2 = r.final_error;
    out->iterations = r.iterations;
    out->converged = r.converged ? 1 : 0;
  });
}

regal_status regal_basis_build(const regal_mesh* const* meshes, size_t count, double cutoff, regal_basis** out) {
  return guarded([&] {
    require(out, "out");
    if (count) require(meshes, "meshes");
    std::vector<regal::TriangleMesh> corpus;
    for (size_t i = 0; i < count; ++i) {
      require(meshes[i], "mesh");
      corpus.push_back(meshes[i]->mesh);
    }
    *out = new regal_basis{regal::pca_build(corpus, cutoff)};
  });
}

regal_status regal_basis_load(const char* path, regal_basis** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new regal_basis{regal::load_basis(path)};
  });
}

regal_status regal_basis_save(const regal_basis* basis, const char* path) {
  return guarded([&] {
    require(basis, "basis");
    require(path, "path");
    regal::save_basis(basis->basis, path);
  });
}

void regal_basis_free(regal_basis* basis) { delete basis; }

size_t regal_basis_component_count(const regal_basis* basis) { return basis ? basis->basis.component_count() : 0; }

regal_status regal_basis_fit(const regal_basis* basis, const regal_mesh* target, double reg_weight, double* alpha,
                             size_t capacity) {
  return guarded([&] {
    require(basis, "basis");
    require(target, "target");
    const Eigen::VectorXd a = regal::fit_to_mesh(basis->basis, target->mesh, reg_weight);
    if (a.size() > 0) require(alpha, "alpha");
    if (capacity < static_cast<size_t>(a.size()))
      regal::fail(regal::ErrorCode::InvalidArgument, "coefficient buffer too small");
    for (Eigen::Index i = 0; i < a.size(); ++i) alpha[i] = a(i);
  });
}

regal_status regal_basis_reconstruct(const regal_basis* basis, const double* alpha, size_t count, regal_mesh** out) {
  return guarded([&] {
    require(basis, "basis");
    require(out, "out");
    if (count) require(alpha, "alpha");
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alpha, static_cast<Eigen::Index>(count));
    *out = new regal_mesh{regal::reconstruct(basis->basis, a)};
  });
}

void regal_eval_options_default(regal_eval_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
  o->jobs = -1;
}

int regal_cmd_eval(const regal_eval_options* o) {
  return guarded_command([&] {
    require(o, "options");
    require(o->config_path, "config_path");
    regal::EvalOverrides ov;
    if (o->jobs >= 0) ov.jobs = o->jobs;
    if (o->regions) ov.regions = regal::parse_region_list(o->regions);
    ov.export_heatmaps = o->export_heatmaps != 0;
    ov.gicp_only = o->gicp_only != 0;
    if (o->report_path) ov.report = o->report_path;
    return regal::cmd_eval(o->config_path, ov, make_log(o->log, o->log_user));
  });
}

void regal_synth_options_default(regal_synth_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
  o->spacing = 2.0;
  o->blend_rings = 2;
}

int regal_cmd_synth(const regal_synth_options* o) {
  return guarded_command([&] {
    require(o, "options");
    require(o->out_dir, "out_dir");
    regal::SynthOptions s;
    s.generate = o->generate != 0;
    s.spacing = o->spacing;
    if (o->base) s.base = o->base;
    if (o->base_annotations) s.base_annotations = o->base_annotations;
    for (size_t i = 0; i < o->donor_count; ++i) s.donors.emplace_back(o->donors[i]);
    s.regions = split(o->regions);
    s.blend_rings = o->blend_rings;
    s.out_dir = o->out_dir;
    return regal::cmd_synth(s, make_log(o->log, o->log_user));
  });
}

void regal_transfer_options_default(regal_transfer_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
  o->use_bounding_box = 1;
}

int regal_cmd_transfer(const regal_transfer_options* o) {
  return guarded_command([&] {
    require(o, "options");
    for (const char* p : {o->low, o->low_annotations, o->high, o->out}) require(p, "transfer path");
    regal::TransferCommandOptions t;
    t.low = o->low;
    t.low_annotations = o->low_annotations;
    t.high = o->high;
    t.out = o->out;
    t.regions = split(o->regions);
    t.exclusions = split(o->exclusions);
    t.crop = o->crop != 0;
    t.use_bounding_box = o->use_bounding_box != 0;
    return regal::cmd_transfer(t, make_log(o->log, o->log_user));
  });
}

void regal_basis_build_options_default(regal_basis_build_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
  o->cutoff = regal::kDefaultVarianceCutoff;
}

int regal_cmd_basis_build(const regal_basis_build_options* o) {
  return guarded_command([&] {
    require(o, "options");
    require(o->out, "out");
    regal::BasisBuildOptions b;
    for (size_t i = 0; i < o->mesh_count; ++i) b.meshes.emplace_back(o->meshes[i]);
    b.cutoff = o->cutoff;
    b.out = o->out;
    return regal::cmd_basis_build(b, make_log(o->log, o->log_user));
  });
}

void regal_basis_fit_options_default(regal_basis_fit_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
}

int regal_cmd_basis_fit(const regal_basis_fit_options* o) {
  return guarded_command([&] {
    require(o, "options");
    for (const char* p : {o->basis, o->target, o->out}) require(p, "basis fit path");
    regal::BasisFitOptions f;
    f.basis = o->basis;
    f.target = o->target;
    f.reg_weight = o->reg_weight;
    f.out = o->out;
    if (o->annotations) f.annotations = o->annotations;
    f.regions = split(o->regions);
    f.export_heatmaps = o->export_heatmaps != 0;
    if (o->heatmap_dir) f.heatmap_dir = o->heatmap_dir;
    return regal::cmd_basis_fit(f, make_log(o->log, o->log_user));
  });
}

}  // extern "C"
