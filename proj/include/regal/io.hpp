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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regal/mesh.hpp"

namespace regal {

enum class MeshFormat { Auto, Obj, Ply };

/// Reads an ASCII OBJ (`v`/`f` lines, 1-based, other directives ignored) or a
/// binary little-endian PLY. `Auto` picks the format from the extension.
/// Errors name the 1-based face number of the offending record.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);

TriangleMesh parse_obj(const std::string& text);

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Binary little-endian PLY with float x/y/z and int vertex_indices. When
/// `vertex_error` is given (one value per vertex) it is written as an extra
/// `float error` vertex property.
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path,
              std::span<const double> vertex_error = {});

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Per-vertex `error` property from a PLY written by save_ply, empty when absent.
std::vector<double> load_ply_vertex_error(const std::filesystem::path& path);

/// Keypoint slot assignment used by the nose-radius crop. Defaults follow the
/// 68-point iBUG layout.
struct KeypointSlots {
  std::size_t nose_tip = 30;
  std::size_t outer_eye_left = 36;
  std::size_t outer_eye_right = 45;
  std::size_t nose_bridge = 27;
  std::size_t nose_lower = 33;
};

/// Sidecar annotation file: ordered keypoints plus named face-id regions.
///
///   { "keypoints": [..], "keypoint_slots": {"nose_tip": 30, ..},
///     "regions": { "nose": [..], "mouth": [..], .. } }
struct Annotations {
  std::vector<Index> keypoints;
  std::optional<KeypointSlots> slots;
  std::map<std::string, std::vector<Index>> regions;
};

Annotations load_annotations(const std::filesystem::path& path);
void save_annotations(const Annotations& annotations, const std::filesystem::path& path);
std::string annotations_to_string(const Annotations& annotations);
Annotations annotations_from_string(const std::string& text);

/// Correspondence file (JSON) used to ship ground-truth maps with fixtures.
void save_correspondences(const CorrespondenceMap& map, const std::filesystem::path& path);
CorrespondenceMap load_correspondences(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace regal
