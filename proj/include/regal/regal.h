/*
 * Copyright 2026 The regal Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REGAL_REGAL_H_
#define REGAL_REGAL_H_

/*
 * C interface of libregal. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Functions returning
 * regal_status record a message retrievable with regal_last_error() on the
 * calling thread. Command functions return a process exit code instead
 * (0 success, 1 partial failure, 2 configuration or I/O error).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(REGAL_BUILDING_LIBRARY)
#define REGAL_API __declspec(dllexport)
#else
#define REGAL_API __declspec(dllimport)
#endif
#else
#define REGAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum regal_status {
  REGAL_OK = 0,
  REGAL_ERR_INVALID_ARGUMENT = 1,
  REGAL_ERR_PARSE = 2,
  REGAL_ERR_IO = 3,
  REGAL_ERR_DEGENERATE = 4,
  REGAL_ERR_SINGULAR = 5,
  REGAL_ERR_NUMERIC = 6,
  REGAL_ERR_TOPOLOGY_MISMATCH = 7,
  REGAL_ERR_EMPTY = 8,
  REGAL_ERR_INTERNAL = 99
} regal_status;

typedef struct regal_mesh regal_mesh;
typedef struct regal_basis regal_basis;

/* Receives one log line (no trailing newline). */
typedef void (*regal_log_fn)(void* user, const char* line);

REGAL_API const char* regal_version(void);
/* Message of the last failed call on this thread; "" if none. */
REGAL_API const char* regal_last_error(void);
REGAL_API const char* regal_status_name(regal_status status);

/* ---- meshes ---- */

/* `vertices` holds 3 * vertex_count doubles (mm), `faces` 3 * face_count indices. */
REGAL_API regal_status regal_mesh_create(const double* vertices, size_t vertex_count, const uint32_t* faces,
                                         size_t face_count, regal_mesh** out);
/* Format from the extension: .obj or .ply. */
REGAL_API regal_status regal_mesh_load(const char* path, regal_mesh** out);
REGAL_API regal_status regal_mesh_save(const regal_mesh* mesh, const char* path);
REGAL_API void regal_mesh_free(regal_mesh* mesh);
REGAL_API size_t regal_mesh_vertex_count(const regal_mesh* mesh);
REGAL_API size_t regal_mesh_face_count(const regal_mesh* mesh);
/* Copies into caller buffers of 3 * count entries. */
REGAL_API regal_status regal_mesh_vertices(const regal_mesh* mesh, double* out, size_t capacity);
REGAL_API regal_status regal_mesh_faces(const regal_mesh* mesh, uint32_t* out, size_t capacity);

/* Nearest surface point: face id, barycentric triple, point and distance. */
REGAL_API regal_status regal_mesh_nearest_point(const regal_mesh* mesh, const double point[3], uint32_t* face,
                                                double bary[3], double closest[3], double* distance);

/* ---- alignment ---- */

typedef struct regal_icp_params {
  int max_iters;      /* default 100 */
  double tol;         /* default 1e-6 mm^2 */
  double max_distance; /* <= 0 disables rejection */
} regal_icp_params;

REGAL_API void regal_icp_params_default(regal_icp_params* params);

typedef struct regal_alignment {
  double rotation[9]; /* row-major */
  double translation[3];
  double final_nmse_mm2;
  int iterations;
  int converged;
} regal_alignment;

/* Rigid ICP of `source` onto `target` from the identity. */
REGAL_API regal_status regal_gicp(const regal_mesh* source, const regal_mesh* target, const regal_icp_params* params,
                                  regal_alignment* out);

/* ---- morphable basis ---- */

REGAL_API regal_status regal_basis_build(const regal_mesh* const* meshes, size_t count, double cutoff,
                                         regal_basis** out);
REGAL_API regal_status regal_basis_load(const char* path, regal_basis** out);
REGAL_API regal_status regal_basis_save(const regal_basis* basis, const char* path);
REGAL_API void regal_basis_free(regal_basis* basis);
REGAL_API size_t regal_basis_component_count(const regal_basis* basis);
/* `alpha` receives component_count values. */
REGAL_API regal_status regal_basis_fit(const regal_basis* basis, const regal_mesh* target, double reg_weight,
                                       double* alpha, size_t capacity);
REGAL_API regal_status regal_basis_reconstruct(const regal_basis* basis, const double* alpha, size_t count,
                                               regal_mesh** out);

/* ---- commands ---- */

typedef struct regal_eval_options {
  const char* config_path;
  int jobs;              /* < 0 keeps the config value */
  const char* regions;   /* comma list of name or name=faces.json; NULL keeps the config */
  int export_heatmaps;
  int gicp_only;
  const char* report_path; /* NULL keeps the config */
  regal_log_fn log;
  void* log_user;
} regal_eval_options;

REGAL_API void regal_eval_options_default(regal_eval_options* options);
REGAL_API int regal_cmd_eval(const regal_eval_options* options);

typedef struct regal_synth_options {
  int generate;                /* procedural base and four donors */
  double spacing;              /* grid spacing in mm when generating */
  const char* base;            /* base mesh when not generating */
  const char* base_annotations;
  const char* const* donors;
  size_t donor_count;
  const char* regions;         /* comma list; NULL = all four face regions when generating */
  int blend_rings;
  const char* out_dir;
  regal_log_fn log;
  void* log_user;
} regal_synth_options;

REGAL_API void regal_synth_options_default(regal_synth_options* options);
REGAL_API int regal_cmd_synth(const regal_synth_options* options);

typedef struct regal_transfer_options {
  const char* low;
  const char* low_annotations;
  const char* high;
  const char* out;
  const char* regions;    /* comma list; NULL = every annotated region */
  const char* exclusions; /* comma list of low-mesh regions to subtract */
  int crop;
  int use_bounding_box;
  regal_log_fn log;
  void* log_user;
} regal_transfer_options;

REGAL_API void regal_transfer_options_default(regal_transfer_options* options);
REGAL_API int regal_cmd_transfer(const regal_transfer_options* options);

typedef struct regal_basis_build_options {
  const char* const* meshes;
  size_t mesh_count;
  double cutoff;
  const char* out;
  regal_log_fn log;
  void* log_user;
} regal_basis_build_options;

REGAL_API void regal_basis_build_options_default(regal_basis_build_options* options);
REGAL_API int regal_cmd_basis_build(const regal_basis_build_options* options);

typedef struct regal_basis_fit_options {
  const char* basis;
  const char* target;
  double reg_weight;
  const char* out;
  const char* annotations; /* optional: per-region residuals */
  const char* regions;     /* comma list; NULL = every annotated region */
  int export_heatmaps;
  const char* heatmap_dir;
  regal_log_fn log;
  void* log_user;
} regal_basis_fit_options;

REGAL_API void regal_basis_fit_options_default(regal_basis_fit_options* options);
REGAL_API int regal_cmd_basis_fit(const regal_basis_fit_options* options);

#ifdef __cplusplus
}
#endif

#endif /* REGAL_REGAL_H_ */
